"""Command-line surface.

Six subcommands: ``optics`` (expected-depth math and the full sweep table),
``simulate`` (attacked-image synthesis), ``optimize`` (loss-driven level
search), ``metrics`` (distortion / error rates), ``defend`` (blur
detection), ``scenario`` (closed-loop braking runs).

Conventions shared by all commands:

* units are meters / seconds / pixels throughout;
* every option can also come from a ``key = value`` config file via
  ``--config``; explicit flags win over file entries;
* human-readable numbers print with 6 significant digits, CSV output keeps
  full float precision;
* exit codes: 0 success, 1 domain error (singular / infeasible geometry),
  2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import attack_opt, defense, estimation, metrics, optics, scenario
from .errors import DepthlensError, SingularConfiguration
from .imaging import (AttackProfile, BlurPlacement, LensKind, LensRegion,
                      RasterImage, apply_attack_transform, level_to_profile,
                      region_masks)


def _fmt(x: float) -> str:
    return f"{x:.6g}"


class _Command:
    """One subcommand: its parser plus the option registry used to merge
    config-file entries (flags override the file)."""

    def __init__(self, subparsers, name: str, help_text: str):
        self.parser = subparsers.add_parser(name, help=help_text)
        self.parser.add_argument("--config", default=None,
                                 help="key = value file supplying defaults")
        self.types: dict[str, object] = {}

    def opt(self, flag: str, **kwargs):
        action = self.parser.add_argument(flag, **kwargs)
        self.types[action.dest] = kwargs.get("type", str)
        return action

    def flag(self, flag: str, **kwargs):
        action = self.parser.add_argument(flag, action="store_true", **kwargs)
        self.types[action.dest] = bool
        return action


def _load_config_file(path: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = line.split("=", 1)
            entries[key.strip().replace("-", "_")] = value.strip()
    return entries


def _merge_config(ns: argparse.Namespace, command: _Command) -> None:
    if not ns.config:
        return
    entries = _load_config_file(ns.config)
    for key, raw in entries.items():
        if key not in command.types:
            raise ValueError(f"unknown config key {key!r}")
        if getattr(ns, key, None) not in (None, False):
            continue  # explicit flag wins
        typ = command.types[key]
        if typ is bool:
            setattr(ns, key, raw.lower() in ("1", "true", "yes", "on"))
        else:
            setattr(ns, key, typ(raw))


def _require(ns, *names):
    for name in names:
        if getattr(ns, name, None) is None:
            raise ValueError(f"missing required option --{name.replace('_', '-')}")


def _parse_region(ns) -> LensRegion:
    kind = ns.region or "full"
    if kind == "full":
        return LensRegion.full_frame()
    if kind == "circle":
        _require(ns, "cx", "cy", "radius")
        return LensRegion.circle(ns.cx, ns.cy, ns.radius)
    raise ValueError(f"region must be 'full' or 'circle', got {kind!r}")


def _lens_kind(name: str) -> LensKind:
    try:
        return LensKind(name)
    except ValueError:
        raise ValueError(f"lens kind must be concave or convex, got {name!r}") from None


# ---------------------------------------------------------------- optics ----

def _add_optics(sub) -> _Command:
    cmd = _Command(sub, "optics", "closed-form expected depth for a lens stack")
    cmd.opt("--lens", type=str, help="concave | convex | none (pass-through)")
    cmd.opt("--f", type=float, help="attack lens focal length magnitude, m")
    cmd.opt("--db", type=float, help="attack lens to camera lens gap, m")
    cmd.opt("--do1", type=float, help="object to attack lens distance, m")
    cmd.opt("--fc", type=float, help="camera focal length, m")
    cmd.opt("--table", type=str,
            help="emit the full (f, d_b, d_o1) sweep CSV for concave|convex")
    return cmd


def _signed_focal(lens: str, magnitude: float) -> float:
    return -abs(magnitude) if lens == "concave" else abs(magnitude)


def cmd_optics(ns) -> int:
    if ns.table:
        if ns.table not in ("concave", "convex"):
            raise ValueError(f"--table takes concave or convex, got {ns.table!r}")
        _require(ns, "fc")
        print("lens,f_m,d_b_m,d_o1_m,m_total,m_ori,depth_ratio,expected_depth_m")
        for f, d_b, d_o1, result in optics.expected_depth_grid(
                concave=(ns.table == "concave"), camera_focal_length_m=ns.fc):
            depth = result.depth_ratio * d_o1
            print(f"{ns.table},{f!r},{d_b!r},{d_o1!r},{result.m_total!r},"
                  f"{result.m_ori!r},{result.depth_ratio!r},{depth!r}")
        return 0

    _require(ns, "lens", "do1", "fc", "db")
    camera = optics.CameraSpec(focal_length_m=ns.fc, lens_gap_m=ns.db)
    if ns.lens == "none":
        lens = None
    else:
        _require(ns, "f")
        if ns.lens not in ("concave", "convex"):
            raise ValueError(f"lens must be concave, convex or none, got {ns.lens!r}")
        lens = optics.LensSpec(_signed_focal(ns.lens, ns.f))
    geom = optics.AttackGeometry(ns.do1, lens, camera)
    result = optics.combined_magnification(geom)
    scenario_name = result.scenario.value if result.scenario else "pass_through"
    feasible = result.scenario.feasible_in_ad if result.scenario else True
    print(f"scenario={scenario_name} feasible={str(feasible).lower()}")
    print(f"m1={_fmt(result.m1)} m2={_fmt(result.m2)}")
    print(f"m_total={_fmt(result.m_total)} m_ori={_fmt(result.m_ori)}")
    print(f"depth_ratio={_fmt(result.depth_ratio)}")
    print(f"expected_depth_m={_fmt(result.depth_ratio * ns.do1)}")
    return 0


# -------------------------------------------------------------- simulate ----

def _add_simulate(sub) -> _Command:
    cmd = _Command(sub, "simulate", "render an attacked image")
    cmd.opt("--input", type=str, help="benign PGM/PPM")
    cmd.opt("--output", type=str, help="attacked image path")
    cmd.opt("--lens-kind", type=str, help="concave | convex")
    cmd.opt("--level", type=int, help="discrete attack level 1..9")
    cmd.opt("--scale", type=float, help="override rescale factor")
    cmd.opt("--blur", type=int, help="override blur radius, px")
    cmd.opt("--placement", type=str, help="override: in_lens | out_of_lens")
    cmd.opt("--region", type=str, help="full (default) | circle")
    cmd.opt("--cx", type=float, help="circle center x, px")
    cmd.opt("--cy", type=float, help="circle center y, px")
    cmd.opt("--radius", type=float, help="circle radius, px")
    cmd.opt("--emit-masks", type=str,
            help="prefix for <prefix>_in.pgm / <prefix>_out.pgm mask dumps")
    return cmd


def _build_profile(ns, region: LensRegion) -> AttackProfile:
    kind = _lens_kind(ns.lens_kind) if ns.lens_kind else LensKind.CONCAVE
    if ns.level is not None:
        profile = level_to_profile(kind, ns.level, region=region)
    else:
        if ns.scale is None and ns.blur is None:
            raise ValueError("give --level or an explicit --scale/--blur profile")
        default_placement = (BlurPlacement.OUT_OF_LENS if kind is LensKind.CONCAVE
                             else BlurPlacement.IN_LENS)
        profile = AttackProfile(lens_kind=kind, level=1, region=region,
                                scale_factor=ns.scale if ns.scale is not None else 1.0,
                                blur_radius=ns.blur if ns.blur is not None else 0,
                                blur_placement=default_placement)
        return profile
    scale = profile.scale_factor if ns.scale is None else ns.scale
    blur = profile.blur_radius if ns.blur is None else ns.blur
    placement = profile.blur_placement
    if ns.placement is not None:
        placement = BlurPlacement(ns.placement)
    return AttackProfile(lens_kind=profile.lens_kind, level=profile.level,
                         region=region, scale_factor=scale, blur_radius=blur,
                         blur_placement=placement)


def cmd_simulate(ns) -> int:
    _require(ns, "input", "output")
    image = RasterImage.load(ns.input)
    region = _parse_region(ns)
    profile = _build_profile(ns, region)
    attacked = apply_attack_transform(image, profile)
    attacked.save(ns.output)
    print(f"wrote {ns.output} scale={_fmt(profile.scale_factor)} "
          f"blur={profile.blur_radius} placement={profile.blur_placement.value}")
    if ns.emit_masks:
        masks = region_masks(image.width, image.height, region)
        for suffix, mask in (("in", masks.in_lens), ("out", masks.out_of_lens)):
            path = f"{ns.emit_masks}_{suffix}.pgm"
            RasterImage((mask * np.uint8(255)).astype(np.uint8)).save(path)
            print(f"wrote {path}")
    return 0


# -------------------------------------------------------------- optimize ----

def _add_optimize(sub) -> _Command:
    cmd = _Command(sub, "optimize", "brute-force level search over alphas")
    cmd.opt("--input", type=str, help="benign PGM/PPM")
    cmd.opt("--mode", type=str, help="targeted | untargeted")
    cmd.opt("--lens-kind", type=str, help="concave | convex")
    cmd.opt("--alphas", type=str, help="comma list, default 0.1,0.2,0.3,0.4")
    cmd.opt("--boxes", type=str, help="vehicle bounding-box file (first box used)")
    cmd.opt("--region", type=str, help="full (default) | circle")
    cmd.opt("--cx", type=float, help="circle center x, px")
    cmd.opt("--cy", type=float, help="circle center y, px")
    cmd.opt("--radius", type=float, help="circle radius, px")
    cmd.opt("--estimator", type=str, help="proxy (default) | external")
    cmd.opt("--maps", type=str, help="map directory for the external estimator")
    cmd.opt("--map-kind", type=str, help="disparity (default) | depth")
    cmd.opt("--rescale", type=float, help="divide external disparities by this")
    cmd.opt("--y-tar", type=float, help="target value for targeted mode")
    cmd.opt("--fiducial-height", type=float, help="proxy fiducial height, m")
    cmd.opt("--focal-px", type=float, help="proxy focal length, px")
    cmd.opt("--baseline", type=float, help="stereo baseline, m (default 0.54)")
    cmd.opt("--detect-threshold", type=int, help="proxy blob threshold (default 96)")
    cmd.opt("--output", type=str, help="CSV path (default stdout)")
    return cmd


def cmd_optimize(ns) -> int:
    _require(ns, "input", "mode", "lens_kind", "boxes")
    image = RasterImage.load(ns.input)
    mode = attack_opt.Mode(ns.mode)
    kind = _lens_kind(ns.lens_kind)
    region = _parse_region(ns)
    boxes = estimation.load_boxes(ns.boxes)
    if not boxes:
        raise ValueError(f"no boxes in {ns.boxes}")
    alphas = [float(a) for a in (ns.alphas or "0.1,0.2,0.3,0.4").split(",")]

    estimator_name = ns.estimator or "proxy"
    if estimator_name == "proxy":
        _require(ns, "fiducial_height", "focal_px")
        fiducial = estimation.FiducialSpec(
            physical_height_m=ns.fiducial_height,
            detection_threshold=ns.detect_threshold if ns.detect_threshold is not None else 96,
            reference_box=boxes[0])
        intrinsics = estimation.CameraIntrinsics(
            baseline_m=ns.baseline if ns.baseline is not None else 0.54,
            focal_px=ns.focal_px)
        estimator = estimation.ProxyDepthMapper(fiducial, intrinsics)
    elif estimator_name == "external":
        _require(ns, "maps")
        estimator = estimation.DirectoryMapEstimator(
            ns.maps, kind=ns.map_kind or "disparity", rescale=ns.rescale)
    else:
        raise ValueError(f"estimator must be proxy or external, got {estimator_name!r}")

    y_tar = ns.y_tar
    if y_tar is None and mode is attack_opt.Mode.TARGETED:
        y_tar = attack_opt.DEFAULT_Y_TAR[kind]
    cfg = attack_opt.LossConfig(alpha=alphas[0], mode=mode, vehicle_box=boxes[0],
                                region=region, y_tar=y_tar)
    rows = attack_opt.alpha_sweep(image, estimator, cfg, alphas, kind)
    csv_text = attack_opt.sweep_to_csv(rows)
    if ns.output:
        with open(ns.output, "w", encoding="ascii") as fh:
            fh.write(csv_text)
        print(f"wrote {ns.output}")
    else:
        sys.stdout.write(csv_text)
    return 0


# ---------------------------------------------------------------- metrics ----

def _add_metrics(sub) -> _Command:
    cmd = _Command(sub, "metrics", "attack distortion / error rates")
    cmd.opt("--kind", type=str, help="adr | aer")
    cmd.opt("--attacked", type=float, help="attacked reading (scalar mode)")
    cmd.opt("--benign", type=float, help="benign reading (adr)")
    cmd.opt("--target", type=float, help="target value (aer)")
    cmd.opt("--attacked-map", type=str, help="attacked map file (map mode)")
    cmd.opt("--benign-map", type=str, help="benign map file (adr map mode)")
    cmd.opt("--map-kind", type=str, help="depth (default) | disparity")
    cmd.opt("--boxes", type=str, help="mask box file (first box used)")
    return cmd


def cmd_metrics(ns) -> int:
    _require(ns, "kind")
    if ns.kind not in ("adr", "aer"):
        raise ValueError(f"kind must be adr or aer, got {ns.kind!r}")

    if ns.attacked_map:
        _require(ns, "boxes")
        boxes = estimation.load_boxes(ns.boxes)
        kind = ns.map_kind or "depth"
        att = estimation.load_depth_map(ns.attacked_map, kind=kind)
        mask = boxes[0].to_mask(att.width, att.height)
        attacked = estimation.masked_mean(att, mask)
    else:
        _require(ns, "attacked")
        attacked = ns.attacked

    if ns.kind == "adr":
        if ns.benign_map:
            boxes = estimation.load_boxes(ns.boxes)
            kind = ns.map_kind or "depth"
            ben = estimation.load_depth_map(ns.benign_map, kind=kind)
            benign = estimation.masked_mean(ben, boxes[0].to_mask(ben.width, ben.height))
        else:
            _require(ns, "benign")
            benign = ns.benign
        print(f"adr={_fmt(metrics.adr(attacked, benign))}")
    else:
        _require(ns, "target")
        print(f"aer={_fmt(metrics.aer(attacked, ns.target))}")
    return 0


# ----------------------------------------------------------------- defend ----

def _add_defend(sub) -> _Command:
    cmd = _Command(sub, "defend", "blur detection verdicts")
    cmd.opt("--input", type=str, help="image to score")
    cmd.opt("--method", type=str, help="varlap | lbp")
    cmd.opt("--threshold", type=float, help="verdict threshold (method default)")
    cmd.opt("--window", type=int, help="lbp tile size, px (default 32)")
    cmd.opt("--delta", type=int, help="lbp neighbor delta (default 20)")
    cmd.opt("--mask-out", type=str, help="write the blur mask PGM here (lbp)")
    return cmd


def cmd_defend(ns) -> int:
    _require(ns, "input", "method")
    image = RasterImage.load(ns.input)
    if ns.method == "varlap":
        threshold = ns.threshold if ns.threshold is not None else defense.DEFAULT_VARLAP_THRESHOLD
        verdict = defense.varlap_verdict(image, threshold)
    elif ns.method == "lbp":
        threshold = ns.threshold if ns.threshold is not None else defense.DEFAULT_LBP_SCORE_THRESHOLD
        window = ns.window if ns.window is not None else defense.DEFAULT_TILE_PX
        delta = ns.delta if ns.delta is not None else defense.DEFAULT_LBP_DELTA
        sharpness = defense.lbp_sharpness_map(image, window=window, lbp_threshold=delta)
        verdict = defense.segment_blur(sharpness, threshold)
    else:
        raise ValueError(f"unsupported method {ns.method!r} (varlap or lbp)")
    print(verdict.report_line())
    if ns.mask_out:
        if verdict.blur_mask is None:
            raise ValueError("--mask-out needs the lbp method")
        RasterImage((verdict.blur_mask * np.uint8(255)).astype(np.uint8)).save(ns.mask_out)
        print(f"wrote {ns.mask_out}")
    return 0


# --------------------------------------------------------------- scenario ----

def _add_scenario(sub) -> _Command:
    cmd = _Command(sub, "scenario", "closed-loop braking run")
    cmd.opt("--gap0", type=float, help="initial gap, m (default 40)")
    cmd.opt("--speed", type=float, help="ego speed, m/s (default 10)")
    cmd.opt("--max-decel", type=float, help="braking deceleration, m/s^2 (default 6)")
    cmd.opt("--margin", type=float, help="safety margin, m (default 2)")
    cmd.opt("--dt", type=float, help="tick, s (default 0.01)")
    cmd.opt("--max-time", type=float, help="simulation cap, s (default 60)")
    cmd.opt("--sigma", type=float, help="perception noise sigma, m (default 0)")
    cmd.opt("--seed", type=int, help="noise seed (default 0)")
    cmd.opt("--ratio", type=float, help="perceived/true depth ratio")
    cmd.flag("--ratio-from-optics", help="derive the ratio from lens geometry")
    cmd.opt("--lens", type=str, help="concave | convex (with --ratio-from-optics)")
    cmd.opt("--f", type=float, help="attack lens focal length magnitude, m")
    cmd.opt("--db", type=float, help="lens gap, m")
    cmd.opt("--do1", type=float, help="object distance, m")
    cmd.opt("--fc", type=float, help="camera focal length, m")
    cmd.opt("--log", type=str, help="write the tick CSV here")
    return cmd


def cmd_scenario(ns) -> int:
    if ns.ratio_from_optics:
        _require(ns, "lens", "f", "db", "do1", "fc")
        geom = optics.AttackGeometry(
            ns.do1, optics.LensSpec(_signed_focal(ns.lens, ns.f)),
            optics.CameraSpec(focal_length_m=ns.fc, lens_gap_m=ns.db))
        ratio = optics.combined_magnification(geom).depth_ratio
        print(f"ratio={_fmt(ratio)}")
    else:
        ratio = ns.ratio if ns.ratio is not None else 1.0
    cfg = scenario.ScenarioConfig(
        initial_gap_m=ns.gap0 if ns.gap0 is not None else 40.0,
        ego_speed_mps=ns.speed if ns.speed is not None else 10.0,
        max_decel_mps2=ns.max_decel if ns.max_decel is not None else 6.0,
        safety_margin_m=ns.margin if ns.margin is not None else 2.0,
        depth_ratio=ratio,
        dt_s=ns.dt if ns.dt is not None else 0.01,
        noise_sigma_m=ns.sigma if ns.sigma is not None else 0.0,
        max_sim_time_s=ns.max_time if ns.max_time is not None else 60.0,
        seed=ns.seed if ns.seed is not None else 0)
    outcome, ticks = scenario.run_scenario(cfg)
    print(scenario.outcome_summary(outcome))
    if ns.log:
        with open(ns.log, "w", encoding="ascii") as fh:
            fh.write(scenario.ticks_to_csv(ticks, cfg))
        print(f"wrote {ns.log}")
    return 0


# ------------------------------------------------------------------- main ----

_HANDLERS = {
    "optics": cmd_optics,
    "simulate": cmd_simulate,
    "optimize": cmd_optimize,
    "metrics": cmd_metrics,
    "defend": cmd_defend,
    "scenario": cmd_scenario,
}


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, _Command]]:
    parser = argparse.ArgumentParser(
        prog="depthlens",
        description="optical-lens tampering toolkit for monocular depth pipelines")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "optics": _add_optics(sub),
        "simulate": _add_simulate(sub),
        "optimize": _add_optimize(sub),
        "metrics": _add_metrics(sub),
        "defend": _add_defend(sub),
        "scenario": _add_scenario(sub),
    }
    return parser, commands


def main(argv=None) -> int:
    parser, commands = build_parser()
    ns = parser.parse_args(argv)
    try:
        _merge_config(ns, commands[ns.command])
        return _HANDLERS[ns.command](ns)
    except SingularConfiguration as exc:
        print(f"error: singular configuration: {exc}", file=sys.stderr)
        return 1
    except (DepthlensError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def console_main() -> None:
    raise SystemExit(main())
