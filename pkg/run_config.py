# Konfigurasi Run (file key = value per section)
# ==============================================

import logging
from copy import deepcopy
from io import StringIO
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

from dotenv import dotenv_values

from config import Config
from model_core import ALLEE, LOGISTIC, GrowthLaw, ModelParameterError, ModelParams

logger = logging.getLogger(__name__)

LAMBDA_CASES = ("explicit", "case1", "case2")


class ConfigError(ValueError):
    """File konfigurasi atau override tidak valid"""


# === KONVERSI NILAI ===

def _to_float(text: str) -> float:
    return float(text)


def _to_int(text: str) -> int:
    return int(text)


def _to_optional_float(text: str) -> Optional[float]:
    return None if text.strip().lower() in ("none", "auto", "") else float(text)


def _to_int_list(text: str) -> List[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _to_str(text: str) -> str:
    return text.strip()


def _format(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return str(value)


# section -> key -> (parser, default)
def _schema() -> Dict[str, Dict[str, Tuple[Callable[[str], Any], Any]]]:
    params = Config.DEFAULT_PARAMS
    sim = Config.SIMULATION
    cont = Config.CONTINUATION
    wnl = Config.WNL
    return {
        "model": {
            "tau": (_to_float, params["tau"]),
            "eps": (_to_float, params["eps"]),
            "beta": (_to_float, params["beta"]),
            "r": (_to_float, params["r"]),
            "delta": (_to_float, params["delta"]),
            "chi": (_to_float, params["chi"]),
            "L_domain": (_to_float, params["L_domain"]),
            "growth": (_to_str, params["growth"]),
            "M": (_to_float, params["M"]),
            "Lambda": (_to_float, params["Lambda"]),
            "Lambda_case": (_to_str, params["Lambda_case"]),
        },
        "sim": {
            "N": (_to_int, sim["N"]),
            "dt": (_to_optional_float, sim["dt"]),
            "t_end": (_to_float, sim["t_end"]),
            "steady_tol": (_to_float, sim["steady_tol"]),
            "perturb_amp": (_to_float, sim["perturb_amp"]),
            "check_every": (_to_int, sim["check_every"]),
        },
        "cont": {
            "N": (_to_int, cont["N"]),
            "ds": (_to_float, cont["ds"]),
            "ds_min": (_to_float, cont["ds_min"]),
            "ds_max": (_to_float, cont["ds_max"]),
            "max_points": (_to_int, cont["max_points"]),
            "newton_tol": (_to_float, cont["newton_tol"]),
            "newton_max_iter": (_to_int, cont["newton_max_iter"]),
            "corrector_max_iter": (_to_int, cont["corrector_max_iter"]),
            "grow_factor": (_to_float, cont["grow_factor"]),
            "fast_convergence_iter": (_to_int, cont["fast_convergence_iter"]),
            "switch_ds": (_to_float, cont["switch_ds"]),
            "switch_halvings": (_to_int, cont["switch_halvings"]),
            "chi_min": (_to_float, 0.5),
            "chi_max": (_to_float, 4.5),
            "modes": (_to_int_list, [22]),
        },
        "wnl": {
            "degenerate_tol": (_to_float, wnl["degenerate_tol"]),
            "chi_target": (_to_optional_float, None),
            "case": (_to_str, "logistic"),
            "M_min": (_to_float, -1.0),
            "M_max": (_to_float, 0.9),
            "eps_min": (_to_float, 0.001),
            "eps_max": (_to_float, 1.5),
            "n_M": (_to_int, 50),
            "n_eps": (_to_int, 200),
        },
        "run": {
            "out": (_to_str, str(Config.OUTPUT_DIR)),
            "seeds": (_to_int_list, [0]),
            "max_workers": (_to_int, Config.PERFORMANCE["max_workers"]),
            "n_max": (_to_int, 40),
            "dispersion_samples": (_to_int, 400),
            "growth_points": (_to_int, 201),
        },
    }


class RunConfig:
    """Blok parameter per command: model, sim, cont, wnl, run"""

    def __init__(self, values: Optional[Dict[str, Dict[str, Any]]] = None):
        self.values = values if values is not None else self._defaults()

    @staticmethod
    def _defaults() -> Dict[str, Dict[str, Any]]:
        return {section: {key: deepcopy(default) for key, (_, default) in keys.items()}
                for section, keys in _schema().items()}

    # === PARSING ===

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        """Baca file 'section.key = value' lewat python-dotenv (tanpa interpolasi)"""
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"File konfigurasi tidak ditemukan: {path}")
        raw = dotenv_values(path, interpolate=False)
        config = cls()
        config.update_raw(raw.items())
        logger.info(f"📄 Konfigurasi dimuat dari {path} ({len(raw)} key)")
        return config

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        config = cls()
        config.update_raw(dotenv_values(stream=StringIO(text), interpolate=False).items())
        return config

    def update_raw(self, items: Iterable[Tuple[str, Optional[str]]]):
        schema = _schema()
        for dotted, text in items:
            section, key = self._split_key(dotted, schema)
            if text is None:
                raise ConfigError(f"Key '{dotted}' tanpa nilai")
            parser, _ = schema[section][key]
            try:
                self.values[section][key] = parser(text)
            except ValueError as e:
                raise ConfigError(f"Nilai tidak valid untuk '{dotted}': {text!r} ({e})")

    @staticmethod
    def _split_key(dotted: str, schema) -> Tuple[str, str]:
        if "." not in dotted:
            raise ConfigError(f"Key harus berbentuk section.key, diterima '{dotted}'")
        section, key = dotted.split(".", 1)
        if section not in schema:
            raise ConfigError(f"Section tidak dikenal: '{section}'")
        if key not in schema[section]:
            raise ConfigError(f"Key tidak dikenal: '{dotted}'")
        return section, key

    def apply_overrides(self, overrides: Iterable[str]):
        """Override 'section.key=value' setelah file dibaca"""
        items = []
        for override in overrides or []:
            if "=" not in override:
                raise ConfigError(f"Override harus berbentuk section.key=value: '{override}'")
            key, value = override.split("=", 1)
            items.append((key.strip(), value.strip()))
        self.update_raw(items)

    def serialize(self) -> str:
        lines = []
        for section, keys in self.values.items():
            lines.append(f"# [{section}]")
            for key, value in keys.items():
                lines.append(f"{section}.{key} = {_format(value)}")
        return "\n".join(lines) + "\n"

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.serialize())
        return path

    def __eq__(self, other) -> bool:
        return isinstance(other, RunConfig) and self.values == other.values

    def __getitem__(self, section: str) -> Dict[str, Any]:
        return self.values[section]

    # === VALIDASI DAN KONVERSI ===

    def validate(self) -> List[str]:
        """Return list error (kosong = valid); error model juga diperiksa lewat ModelParams"""
        errors = []
        model = self.values["model"]
        if model["growth"] not in (LOGISTIC, ALLEE):
            errors.append(f"model.growth harus logistic atau allee, diterima {model['growth']}")
        if model["Lambda_case"] not in LAMBDA_CASES:
            errors.append(f"model.Lambda_case harus salah satu {LAMBDA_CASES}")
        if not model["M"] < 1:
            errors.append(f"model.M harus < 1, diterima {model['M']}")
        if self.values["wnl"]["case"] not in ("logistic", "case1", "case2"):
            errors.append("wnl.case harus logistic, case1 atau case2")
        for section in ("sim", "cont"):
            if self.values[section]["N"] < Config.SIMULATION["min_nodes"]:
                errors.append(f"{section}.N harus >= {Config.SIMULATION['min_nodes']}")
        sim = self.values["sim"]
        if sim["dt"] is not None and not sim["dt"] > 0:
            errors.append("sim.dt harus > 0")
        if sim["perturb_amp"] < 0:
            errors.append("sim.perturb_amp tidak boleh negatif")
        cont = self.values["cont"]
        if not 0 < cont["ds_min"] <= cont["ds_max"]:
            errors.append("cont.ds_min harus di (0, ds_max]")
        if cont["chi_min"] >= cont["chi_max"]:
            errors.append("cont.chi_min harus < cont.chi_max")
        if not errors:
            try:
                self.model_params()
            except ModelParameterError as e:
                errors.append(str(e))
        return errors

    def require_valid(self) -> "RunConfig":
        errors = self.validate()
        if errors:
            raise ConfigError("; ".join(errors))
        return self

    def growth_law(self) -> GrowthLaw:
        model = self.values["model"]
        case = model["Lambda_case"]
        if case == "case1":
            return GrowthLaw.case1(model["M"])
        if case == "case2":
            return GrowthLaw.case2(model["M"])
        if model["growth"] == ALLEE:
            return GrowthLaw.allee(model["M"], model["Lambda"])
        return GrowthLaw.logistic()

    def model_params(self) -> ModelParams:
        model = self.values["model"]
        return ModelParams(
            tau=model["tau"], eps=model["eps"], beta=model["beta"], r=model["r"],
            delta=model["delta"], chi=model["chi"], L_domain=model["L_domain"],
            growth=self.growth_law(),
        )

    def seeds(self) -> List[int]:
        return list(self.values["run"]["seeds"])

    def chi_range(self) -> Tuple[float, float]:
        return self.values["cont"]["chi_min"], self.values["cont"]["chi_max"]

    def as_dict(self) -> Dict[str, Dict[str, Any]]:
        return deepcopy(self.values)


def default_run_file() -> str:
    """Isi file konfigurasi default (ditulis setup.sh ke run.env)"""
    return RunConfig().serialize()
