"""Parameter schemas: the keys, defaults, ranges and CSV columns of every experiment."""

import math
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .config import ExperimentKind

_REQUIRED = object()

_RANGE_PATTERN = re.compile(r'^\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*$')
_FRACTION_PATTERN = re.compile(r'^\s*(-?\d+)\s*/\s*(\d+)\s*$')


class ParameterSpec(ABC):
    """Abstract base class for one experiment parameter."""

    def __init__(self, name: str, description: str, default: Any = _REQUIRED):
        self.name = name
        self.description = description
        self.default = default

    @property
    def required(self) -> bool:
        return self.default is _REQUIRED

    @abstractmethod
    def coerce(self, value: Any) -> Any:
        """Convert a raw config value, raising ValueError with a short reason."""
        pass

    @abstractmethod
    def type_name(self) -> str:
        pass

    def describe(self) -> str:
        default = "required" if self.required else f"default {self.default!r}"
        return f"{self.name} ({self.type_name()}, {default}): {self.description}"


def _check_bounds(value, minimum, maximum, exclusive_minimum: bool = False) -> None:
    if minimum is not None:
        if exclusive_minimum and not value > minimum:
            raise ValueError(f"must be > {minimum}")
        if not exclusive_minimum and not value >= minimum:
            raise ValueError(f"must be >= {minimum}")
    if maximum is not None and not value <= maximum:
        raise ValueError(f"must be <= {maximum}")


def _as_int(value: Any) -> int:
    if isinstance(value, bool):
        raise ValueError("must be an integer")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str) and re.fullmatch(r'\s*-?\d+\s*', value):
        return int(value)
    raise ValueError("must be an integer")


def _as_real(value: Any):
    """int, float, or a 'p/q' string kept exact as a Fraction."""
    if isinstance(value, bool):
        raise ValueError("must be a real number")
    if isinstance(value, (int, float, Fraction)):
        if isinstance(value, float) and not math.isfinite(value):
            raise ValueError("must be finite")
        return value
    if isinstance(value, str):
        match = _FRACTION_PATTERN.match(value)
        if match:
            return Fraction(int(match.group(1)), int(match.group(2)))
        try:
            return float(value)
        except ValueError:
            pass
    raise ValueError("must be a real number")


class IntParameter(ParameterSpec):

    def __init__(self, name: str, description: str, default: Any = _REQUIRED,
                 minimum: Optional[int] = None, maximum: Optional[int] = None):
        super().__init__(name, description, default)
        self.minimum = minimum
        self.maximum = maximum

    def coerce(self, value: Any) -> int:
        value = _as_int(value)
        _check_bounds(value, self.minimum, self.maximum)
        return value

    def type_name(self) -> str:
        return "integer"


class RealParameter(ParameterSpec):

    def __init__(self, name: str, description: str, default: Any = _REQUIRED,
                 minimum: Optional[float] = None, maximum: Optional[float] = None,
                 exclusive_minimum: bool = False):
        super().__init__(name, description, default)
        self.minimum = minimum
        self.maximum = maximum
        self.exclusive_minimum = exclusive_minimum

    def coerce(self, value: Any):
        value = _as_real(value)
        _check_bounds(value, self.minimum, self.maximum, self.exclusive_minimum)
        return value

    def type_name(self) -> str:
        return "real"


class BoolParameter(ParameterSpec):

    def coerce(self, value: Any) -> bool:
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ('true', 'false'):
            return value.lower() == 'true'
        raise ValueError("must be true or false")

    def type_name(self) -> str:
        return "boolean"


class ChoiceParameter(ParameterSpec):

    def __init__(self, name: str, description: str, choices: Sequence[str], default: Any = _REQUIRED):
        super().__init__(name, description, default)
        self.choices = tuple(choices)

    def coerce(self, value: Any) -> str:
        if not isinstance(value, str):
            raise ValueError(f"must be one of {list(self.choices)}")
        normalized = value.strip().lower().replace('_', '-')
        if normalized not in self.choices:
            raise ValueError(f"must be one of {list(self.choices)}")
        return normalized

    def type_name(self) -> str:
        return "choice " + "|".join(self.choices)


class IntListParameter(IntParameter):
    """A list of integers; accepts a single integer or an inclusive 'a..b' range."""

    def coerce(self, value: Any) -> List[int]:
        if isinstance(value, str):
            match = _RANGE_PATTERN.match(value)
            if match:
                value = list(range(int(match.group(1)), int(match.group(2)) + 1))
        if not isinstance(value, (list, tuple)):
            value = [value]
        if not value:
            raise ValueError("must not be empty")
        return [super(IntListParameter, self).coerce(v) for v in value]

    def type_name(self) -> str:
        return "integer list"


class RealListParameter(RealParameter):

    def coerce(self, value: Any) -> list:
        if not isinstance(value, (list, tuple)):
            value = [value]
        if not value:
            raise ValueError("must not be empty")
        return [super(RealListParameter, self).coerce(v) for v in value]

    def type_name(self) -> str:
        return "real list"


@dataclass(frozen=True)
class ExperimentSchema:
    """Parameters and CSV columns of one experiment."""
    kind: ExperimentKind
    description: str
    parameters: Tuple[ParameterSpec, ...]
    columns: Tuple[str, ...]

    def parameter(self, name: str) -> Optional[ParameterSpec]:
        for spec in self.parameters:
            if spec.name == name:
                return spec
        return None

    def describe(self) -> str:
        lines = [f"{self.kind.value}: {self.description}", "parameters:"]
        lines += [f"  {spec.describe()}" for spec in self.parameters]
        lines.append("columns: " + ", ".join(self.columns))
        return "\n".join(lines)


GROUPS = ("unitary", "so-even", "o-minus", "symplectic", "cbe")
CLASSICAL_GROUPS = GROUPS[:4]
SIGMA2_DEFAULT = 0.5 * math.log(2)
CLOSED_FORMS = ("keating-snaith", "symmetry-coefficient", "selberg", "fyodorov-bouchaud", "critical-coefficient",
                "bramson", "iid-max", "arithmetic-factor", "mom-prediction", "freezing", "zeta")


def _trials(default: int, minimum: int = 1) -> IntParameter:
    return IntParameter("trials", "independent Monte Carlo draws", default, minimum=minimum)


def _build_schemas() -> Dict[ExperimentKind, ExperimentSchema]:
    schemas = [
        ExperimentSchema(ExperimentKind.FIELD_MAX, "maximum of log|P_N| over an arc for Haar U(N)", (
            IntListParameter("N", "matrix sizes", minimum=1),
            _trials(400),
            RealParameter("arc_length", "arc [0, L) searched", 2 * math.pi, minimum=0.0, maximum=2 * math.pi,
                          exclusive_minimum=True),
            IntParameter("grid_factor", "grid points per eigenvalue", 8, minimum=2),
            IntParameter("refine_iters", "refinement passes around the top grid candidates", 6, minimum=0),
            ChoiceParameter("method", "field evaluation route", ("verblunsky", "eigen"), "verblunsky"),
        ), ("N", "mean_max", "stderr", "mean_minus_log_N")),
        ExperimentSchema(ExperimentKind.CLT, "standardized log P_N(A, 0) against N(0, 1)", (
            ChoiceParameter("group", "ensemble", GROUPS, "unitary"),
            IntParameter("N", "matrix size", minimum=3),
            _trials(10000, minimum=100),
            ChoiceParameter("part", "real or imaginary part", ("real", "imag"), "real"),
            ChoiceParameter("normalization", "standardization", ("auto", "exact", "asymptotic"), "auto"),
            RealParameter("beta", "CβE inverse temperature", None, minimum=0.0, exclusive_minimum=True),
        ), ("part", "N", "trials", "normalization", "mean", "variance", "third_moment", "ks_distance")),
        ExperimentSchema(ExperimentKind.PAIR_CORRELATION, "pair density of rescaled eigenphases", (
            ChoiceParameter("group", "ensemble", ("unitary", "cbe"), "unitary"),
            IntParameter("N", "matrix size", minimum=2),
            _trials(1000),
            RealParameter("beta", "CβE inverse temperature", 2.0, minimum=0.0, exclusive_minimum=True),
            RealParameter("bin_width", "histogram bin width", 0.25, minimum=0.0, exclusive_minimum=True),
            RealParameter("x_max", "largest rescaled separation", 10.0, minimum=0.0, exclusive_minimum=True),
        ), ("x", "density", "kernel")),
        ExperimentSchema(ExperimentKind.COVARIANCE, "E[V_N(0) V_N(s)] against the exact finite-N value", (
            IntParameter("N", "matrix size", minimum=1),
            RealListParameter("separations", "angles s in (0, π]", minimum=0.0, maximum=math.pi,
                              exclusive_minimum=True),
            _trials(1000),
            ChoiceParameter("method", "field evaluation route", ("verblunsky", "eigen"), "verblunsky"),
        ), ("s", "estimate", "stderr", "prediction")),
        ExperimentSchema(ExperimentKind.MOM_EXACT, "exact MoM_U(N)(k, β) by restricted tableau counts", (
            IntParameter("k", "number of moments", minimum=1, maximum=4),
            IntParameter("beta", "moment order", minimum=1, maximum=4),
            IntListParameter("N", "matrix sizes", minimum=0),
        ), ("N", "value")),
        ExperimentSchema(ExperimentKind.MOM_TOEPLITZ, "MoM_U(N)(k, β) from Toeplitz determinants", (
            IntParameter("k", "number of moments", minimum=1),
            RealParameter("beta", "moment order", minimum=0.0, exclusive_minimum=True),
            IntListParameter("N", "matrix sizes", minimum=1),
            IntParameter("quad_nodes", "trapezoid nodes per angle", 64, minimum=64),
            RealParameter("tolerance", "quadrature tolerance", 1e-8, minimum=0.0, exclusive_minimum=True),
        ), ("N", "value")),
        ExperimentSchema(ExperimentKind.MOM_MC, "Monte Carlo moments of moments", (
            ChoiceParameter("group", "classical group", CLASSICAL_GROUPS, "unitary"),
            RealParameter("k", "number of moments", minimum=0.0, exclusive_minimum=True),
            RealParameter("beta", "moment order", minimum=0.0, exclusive_minimum=True),
            IntListParameter("N", "matrix sizes", minimum=1),
            _trials(1000, minimum=100),
            IntParameter("theta_nodes", "angles per draw (default 8N)", None, minimum=4),
        ), ("N", "mean", "stderr")),
        ExperimentSchema(ExperimentKind.MOM_POLY, "exact MoM polynomial in N (or in 2^n)", (
            IntParameter("k", "number of moments", minimum=1),
            IntParameter("beta", "moment order", minimum=1),
            ChoiceParameter("model", "unitary group or branching random walk", ("unitary", "branching"),
                            "unitary"),
        ), ("power", "coefficient")),
        ExperimentSchema(ExperimentKind.BRANCHING_MOM, "exact branching moments of moments", (
            IntParameter("k", "number of moments", minimum=1, maximum=8),
            RealParameter("beta", "moment order ('p/q' strings stay exact)", minimum=0.0),
            IntListParameter("depth", "tree depths", minimum=1, maximum=64),
            ChoiceParameter("mode", "evaluation route", ("recursion", "bruteforce"), "recursion"),
        ), ("n", "value")),
        ExperimentSchema(ExperimentKind.BRANCHING_MAX, "mean maxima with the log n correction fit", (
            ChoiceParameter("model", "branching random walk or independent baseline", ("brw", "rem"), "brw"),
            IntListParameter("depth", "tree depths", [10, 12, 14, 16, 18, 20, 22], minimum=2),
            _trials(1000, minimum=500),
            RealParameter("sigma2", "increment variance", SIGMA2_DEFAULT, minimum=0.0, exclusive_minimum=True),
        ), ("n", "mean_max", "stderr")),
        ExperimentSchema(ExperimentKind.FREEZING, "normalized free energy across β", (
            ChoiceParameter("model", "field", ("brw", "unitary"), "brw"),
            IntParameter("depth", "tree depth (brw)", 16, minimum=1),
            IntParameter("N", "matrix size (unitary)", 256, minimum=2),
            RealListParameter("betas", "inverse temperatures", [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0],
                              minimum=0.0, exclusive_minimum=True),
            _trials(200, minimum=100),
            RealParameter("sigma2", "increment variance (brw)", SIGMA2_DEFAULT, minimum=0.0, exclusive_minimum=True),
            IntParameter("grid_factor", "grid points per eigenvalue (unitary)", 8, minimum=2),
        ), ("beta", "mean", "stderr", "prediction")),
        ExperimentSchema(ExperimentKind.ZETA_MODEL, "randomized prime model of ζ on the critical line", (
            IntParameter("level", "n with T = e^{2^n}", minimum=1, maximum=4),
            ChoiceParameter("variant", "prime draws", ("steinhaus", "gaussian"), "steinhaus"),
            IntParameter("grid_size", "h-grid points (default 8·2^n)", None, minimum=2),
            BoolParameter("second_order", "include the Re(U_p² p^{-2ih})/(2p) term", False),
            _trials(200, minimum=200),
            ChoiceParameter("quantity", "what to report", ("max", "increments", "covariance"), "max"),
        ), ("quantity", "index", "value", "stderr")),
        ExperimentSchema(ExperimentKind.CLOSED_FORM, "evaluate one closed-form predictor", (
            ChoiceParameter("formula", "closed form", CLOSED_FORMS),
            IntParameter("N", "matrix size", None, minimum=0),
            RealParameter("k", "number of moments", None),
            RealParameter("beta", "moment order", None),
            ChoiceParameter("group", "ensemble", GROUPS, "unitary"),
            RealParameter("a", "Selberg a", None),
            RealParameter("b", "Selberg b", None),
            RealParameter("alpha", "Selberg α", None),
            RealParameter("gamma", "Selberg γ", None),
            IntParameter("n", "Selberg dimension or tree depth", None, minimum=1),
            IntParameter("p_max", "largest prime in the Euler product", 10 ** 6, minimum=2),
            RealParameter("sigma2", "increment variance", SIGMA2_DEFAULT, minimum=0.0, exclusive_minimum=True),
            RealParameter("t", "height on the critical line", None),
        ), ("formula", "value")),
        ExperimentSchema(ExperimentKind.SECULAR, "E|Σ Sc_{j1}...Sc_{jη}|² over Haar U(N)", (
            IntParameter("eta", "number of factors", minimum=1),
            IntParameter("m", "total degree", minimum=0),
            IntListParameter("N", "matrix sizes", minimum=1),
            _trials(1000),
        ), ("N", "mean", "stderr")),
    ]
    return {schema.kind: schema for schema in schemas}


SCHEMAS = _build_schemas()


def get_schema(kind: ExperimentKind) -> ExperimentSchema:
    return SCHEMAS[kind]


def list_schemas() -> List[ExperimentSchema]:
    return [SCHEMAS[kind] for kind in ExperimentKind]
