"""Optical-lens tampering toolkit for monocular depth pipelines.

Submodules map onto the pipeline stages: ``optics`` (closed-form expected
depth for lens stacks), ``imaging`` (attacked-image synthesis), ``estimation``
(depth/disparity plumbing and the geometric proxy estimator), ``metrics``
(distortion / error rates), ``attack_opt`` (brute-force level search),
``defense`` (blur detection), ``scenario`` (closed-loop braking sandbox),
``cli`` (command-line surface).
"""

from . import (attack_opt, defense, estimation, formats, imaging, metrics,
               optics, scenario)

__all__ = [
    "attack_opt",
    "defense",
    "estimation",
    "formats",
    "imaging",
    "metrics",
    "optics",
    "scenario",
]

__version__ = "0.1.0"
