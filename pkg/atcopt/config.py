"""config.py -- study configuration and TOML loading

Configuration file sections:

    [potential]  stiffness, weights, defect_alpha, defect_misfit, defect_radius
    [geometry]   ladder, psi_a, kappa
    [mesh]       grading_exponent, min_angle
    [solver]     tol_newton, max_newton, armijo, tol_outer, tol_J, max_outer,
                 cg_rtol, cg_maxiter, init, direct_limit
    [study]      reference_factor, seed, workers, analysis_ladder, analysis_kappa,
                 out

- 06/09/26 (ams): Created.
- 06/23/26 (ams): Reject unknown keys.
- 08/03/26 (ams): Add analysis_ladder.
- 08/24/26 (ams): Add analysis_kappa; analysis ladder validated with it.
"""

from __future__ import annotations

import dataclasses
import sys
from typing import Tuple

from . import constants, exception, geometry, modes, potential

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


################################################################
# configuration sections
################################################################

@dataclasses.dataclass(frozen=True)
class PotentialConfig:
    stiffness: float = constants.k_morse_stiffness
    weights: Tuple[float, ...] = constants.k_shell_weights
    defect_alpha: float = constants.k_defect_alpha
    defect_misfit: float = constants.k_defect_misfit
    defect_radius: float = constants.k_defect_radius
    homogeneous: bool = False

    def site_model(self, interaction_range=None):
        """SiteModel for this configuration (NN+NNN range by default)."""
        if interaction_range is None:
            interaction_range = geometry.nn_nnn_range()
        pair = potential.PairPotentialSpec(stiffness=self.stiffness, shell_weights=tuple(self.weights))
        defect = None
        if not self.homogeneous:
            defect = potential.DefectSpec(
                alpha=self.defect_alpha, misfit=self.defect_misfit, radius=self.defect_radius
            )
        return potential.SiteModel(interaction_range, pair, defect)


@dataclasses.dataclass(frozen=True)
class GeometryConfig:
    ladder: Tuple[int, ...] = constants.k_ladder
    psi_a: int = constants.k_psi_a
    kappa: int = constants.k_kappa


@dataclasses.dataclass(frozen=True)
class MeshConfig:
    grading_exponent: float = constants.k_grading_exponent
    min_angle: float = constants.k_min_angle


@dataclasses.dataclass(frozen=True)
class SolverConfig:
    tol_newton: float = constants.k_tol_newton
    max_newton: int = constants.k_max_newton
    armijo: float = constants.k_armijo
    tol_outer: float = constants.k_tol_outer
    tol_J: float = constants.k_tol_J
    max_outer: int = constants.k_max_outer
    cg_rtol: float = constants.k_cg_rtol
    cg_maxiter: int = constants.k_cg_maxiter
    init: modes.ControlInit = modes.ControlInit.kZero
    direct_limit: int = constants.k_direct_limit


@dataclasses.dataclass(frozen=True)
class StudySettings:
    reference_factor: int = constants.k_reference_factor
    seed: int = 0
    workers: int = 1
    analysis_ladder: Tuple[int, ...] = constants.k_analysis_ladder
    analysis_kappa: int = constants.k_analysis_kappa
    out: str = "study-out"


@dataclasses.dataclass(frozen=True)
class StudyConfig:
    """Complete study configuration."""

    potential: PotentialConfig = PotentialConfig()
    geometry: GeometryConfig = GeometryConfig()
    mesh: MeshConfig = MeshConfig()
    solver: SolverConfig = SolverConfig()
    study: StudySettings = StudySettings()

    def domains(self, R_core, kappa=None):
        """Geometry for one ladder entry (kappa defaults to the geometry section)."""
        kappa = self.geometry.kappa if kappa is None else kappa
        return geometry.build_domains(R_core, self.geometry.psi_a, kappa)

    def reference_radius(self, ladder=None):
        """Truncation radius N = factor * max r_c over a ladder."""
        ladder = self.geometry.ladder if ladder is None else ladder
        return self.study.reference_factor*max(self.domains(R).r_c for R in ladder)


_sections = {
    "potential": PotentialConfig,
    "geometry": GeometryConfig,
    "mesh": MeshConfig,
    "solver": SolverConfig,
    "study": StudySettings,
}


################################################################
# loading
################################################################

def _coerce(cls, name, key, value):
    field_type = {f.name: f.type for f in dataclasses.fields(cls)}[key]
    try:
        if key == "init":
            return modes.ControlInit(value)
        if "Tuple" in str(field_type):
            element = int if "int" in str(field_type) else float
            return tuple(element(v) for v in value)
        if field_type in ("float", float):
            return float(value)
        if field_type in ("int", int):
            if isinstance(value, bool) or int(value) != value:
                raise ValueError("not an integer")
            return int(value)
        if field_type in ("bool", bool):
            if not isinstance(value, bool):
                raise ValueError("not a boolean")
            return value
        return str(value)
    except (TypeError, ValueError) as err:
        raise exception.ConfigError("[{}] {} = {!r}: {}".format(name, key, value, err)) from err


def config_from_dict(mapping):
    """Build a StudyConfig from a parsed TOML mapping.

    Arguments:
        mapping (dict): section name -> dict of keys

    Returns:
        (StudyConfig): configuration, validated

    Raises:
        exception.ConfigError: unknown section/key, bad value, or invalid ladder
    """
    sections = {}
    for (name, values) in mapping.items():
        if name not in _sections:
            raise exception.ConfigError("unknown config section [{}]".format(name))
        if not isinstance(values, dict):
            raise exception.ConfigError("config section [{}] is not a table".format(name))
        cls = _sections[name]
        known = {f.name for f in dataclasses.fields(cls)}
        kwargs = {}
        for (key, value) in values.items():
            if key not in known:
                raise exception.ConfigError("unknown key {!r} in section [{}]".format(key, name))
            kwargs[key] = _coerce(cls, name, key, value)
        sections[name] = cls(**kwargs)
    cfg = StudyConfig(**sections)
    validate_config(cfg)
    return cfg


def load_config(path):
    """Read and validate a TOML study configuration.

    Arguments:
        path (str or os.PathLike): file name

    Returns:
        (StudyConfig): configuration
    """
    try:
        with open(path, "rb") as stream:
            mapping = tomllib.load(stream)
    except OSError as err:
        raise exception.ConfigError("cannot read config {}: {}".format(path, err)) from err
    except tomllib.TOMLDecodeError as err:
        raise exception.ConfigError("malformed config {}: {}".format(path, err)) from err
    return config_from_dict(mapping)


def validate_config(cfg):
    """Check every ladder entry against the domain construction rules.

    Raises:
        exception.ConfigError: naming the offending entry and inequality
    """
    if len(cfg.geometry.ladder) == 0:
        raise exception.ConfigError("geometry ladder is empty")
    entries = [(R_core, None) for R_core in cfg.geometry.ladder]
    entries += [(R_core, cfg.study.analysis_kappa) for R_core in cfg.study.analysis_ladder]
    for (R_core, kappa) in entries:
        try:
            cfg.domains(R_core, kappa)
        except exception.GeometryError as err:
            raise exception.ConfigError("ladder entry R_core = {}: {}".format(R_core, err)) from err
    if not 1 <= cfg.mesh.grading_exponent < constants.k_dim:
        raise exception.ConfigError("mesh grading_exponent must lie in [1, {})".format(constants.k_dim))
    if cfg.study.reference_factor < 1:
        raise exception.ConfigError("study reference_factor must be at least 1")
    try:
        cfg.potential.site_model()
    except ValueError as err:
        raise exception.ConfigError("[potential]: {}".format(err)) from err
