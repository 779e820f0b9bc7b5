"""Run configuration: one TOML document covering the whole pipeline.

Every physical quantity carries its unit in the key name (``r_capstan_m``,
``v_lock_mps``) to keep unit bugs out of config files. `load_config` and
`write_config` round-trip a `RunConfig` exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .device import DeviceParams
from .errors import InvalidSpec
from .motion import AnchorConfig
from .signal import DetectorMode, DetectorSpec, SgSpec

_DEVICE_KEYS = {
    "r_capstan_m": "r_capstan",
    "k_coil_nm_per_rad": "k_coil",
    "tau0_coil_nm": "tau0_coil",
    "m_fly_kg": "m_fly",
    "r_fly_m": "r_fly",
    "f_retain_n": "F_retain",
    "n_fly": "n_fly",
    "k1_block_n_per_m": "k1_block",
    "k3_block_n_per_m3": "k3_block",
    "x_block_max_m": "x_block_max",
    "l_max_m": "L_max",
    "eps_tension_n": "eps_tension",
}

_DETECTOR_KEYS = {
    "mode": "mode",
    "v_lock_mps": "v_lock",
    "dip_min_mps": "dip_min",
    "recoil_min_mps": "recoil_min",
    "pair_window_s": "pair_window",
    "refractory_s": "refractory",
}

_SG_KEYS = {"window_samples": "window", "poly_order": "order"}


@dataclass(frozen=True)
class RunConfig:
    """Everything a pipeline run needs besides the input files."""

    device: DeviceParams = field(default_factory=DeviceParams)
    detector: DetectorSpec = field(default_factory=DetectorSpec)
    sg: SgSpec = field(default_factory=SgSpec)
    anchor: AnchorConfig = field(default_factory=lambda: AnchorConfig(np.zeros(3)))
    sample_rate: float = 250.0
    start_pos: tuple[float, float, float] = (0.5, 0.0, 0.0)
    seed: int = 0


def default_config() -> RunConfig:
    return RunConfig()


def prototype_config() -> RunConfig:
    """Preset replaying the bench prototype, which engaged at about
    62.8 cm/s: mechanism retention solved for that threshold and the
    velocity-threshold detector matched to it."""
    from dataclasses import replace

    from .tuning import TuneTarget, solve_retention

    base = RunConfig()
    device = solve_retention(TuneTarget(v_star=0.628), base.device)
    return replace(base, device=device, detector=replace(base.detector, v_lock=0.628))


def _pick(section: dict, known: dict, where: str) -> dict:
    unknown = sorted(set(section) - set(known))
    if unknown:
        raise InvalidSpec(f"unknown config keys in [{where}]: {unknown}")
    return {known[k]: v for k, v in section.items()}


def load_config(path) -> RunConfig:
    """Load a RunConfig from TOML. Unknown keys are rejected so typos
    cannot silently fall back to defaults.

    Raises
    ------
    InvalidSpec
        Malformed document, unknown keys, or invalid parameter values.
    OSError
        The file cannot be read.
    """
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as e:
            raise InvalidSpec(f"config is not valid TOML: {e}") from e

    known_sections = {"device", "detector", "sg", "anchor", "run"}
    unknown = sorted(set(doc) - known_sections)
    if unknown:
        raise InvalidSpec(f"unknown config sections: {unknown}")

    device = DeviceParams(**_pick(doc.get("device", {}), _DEVICE_KEYS, "device"))

    det_kwargs = _pick(doc.get("detector", {}), _DETECTOR_KEYS, "detector")
    if "mode" in det_kwargs:
        try:
            det_kwargs["mode"] = DetectorMode(det_kwargs["mode"])
        except ValueError as e:
            raise InvalidSpec(f"unknown detector mode {det_kwargs['mode']!r}") from e
    detector = DetectorSpec(**det_kwargs)

    sg = SgSpec(**_pick(doc.get("sg", {}), _SG_KEYS, "sg"))

    anchor_sec = dict(doc.get("anchor", {}))
    unknown = sorted(set(anchor_sec) - {"device_anchor_m", "body_offset_m"})
    if unknown:
        raise InvalidSpec(f"unknown config keys in [anchor]: {unknown}")
    anchor = AnchorConfig(
        device_anchor=np.asarray(anchor_sec.get("device_anchor_m", [0.0, 0.0, 0.0]), dtype=float),
        body_anchor_offset=np.asarray(anchor_sec.get("body_offset_m", [0.0, 0.0, 0.0]), dtype=float),
    )

    run_sec = dict(doc.get("run", {}))
    unknown = sorted(set(run_sec) - {"sample_rate_hz", "start_pos_m", "seed"})
    if unknown:
        raise InvalidSpec(f"unknown config keys in [run]: {unknown}")
    start = run_sec.get("start_pos_m", (0.5, 0.0, 0.0))

    return RunConfig(
        device=device,
        detector=detector,
        sg=sg,
        anchor=anchor,
        sample_rate=float(run_sec.get("sample_rate_hz", 250.0)),
        start_pos=(float(start[0]), float(start[1]), float(start[2])),
        seed=int(run_sec.get("seed", 0)),
    )


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return f'"{v}"'
    return "[" + ", ".join(_toml_value(float(x)) for x in v) + "]"


def write_config(cfg: RunConfig, path) -> None:
    """Write a RunConfig as TOML, in a fixed key order."""
    d, det, sg, a = cfg.device, cfg.detector, cfg.sg, cfg.anchor
    lines = ["[device]"]
    for key, attr in _DEVICE_KEYS.items():
        lines.append(f"{key} = {_toml_value(getattr(d, attr))}")
    lines += ["", "[detector]", f'mode = "{det.mode.value}"']
    for key, attr in _DETECTOR_KEYS.items():
        if key != "mode":
            lines.append(f"{key} = {_toml_value(getattr(det, attr))}")
    lines += [
        "",
        "[sg]",
        f"window_samples = {sg.window}",
        f"poly_order = {sg.order}",
        "",
        "[anchor]",
        f"device_anchor_m = {_toml_value(a.device_anchor)}",
        f"body_offset_m = {_toml_value(a.body_anchor_offset)}",
        "",
        "[run]",
        f"sample_rate_hz = {_toml_value(cfg.sample_rate)}",
        f"start_pos_m = {_toml_value(cfg.start_pos)}",
        f"seed = {cfg.seed}",
        "",
    ]
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines))
