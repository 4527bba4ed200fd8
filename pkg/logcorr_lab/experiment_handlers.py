"""Experiment handlers: one class per experiment kind, dispatched by a factory."""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional

import numpy as np

from . import closed_forms
from .branching import (TreeConfig, beta_squared, branching_leading_coefficient, brw_max_samples,
                        free_energy_samples, max_regression, mom_branching_exact, mom_branching_polynomial,
                        rem_max_sample, BRUTEFORCE_MAX_EXPONENT)
from .charpoly import (clt_normalization, clt_samples, covariance_prediction, covariance_samples,
                       dyson_pair_density, pair_correlation, secular_sum_samples, summarize_clt,
                       unitary_field_max_samples, unitary_free_energy_samples)
from .config import ExperimentKind
from .ensembles import Group, sample_phase_batch
from .estimates import Estimate, fit_linear, fit_loglog_slope
from .mom import mom_exact_unitary, mom_polynomial, mom_toeplitz, moment_samples
from .number_models import (ModelConfig, ModelVariant, model_covariance, model_field_batch, model_increments,
                            model_max_report, model_variance, zeta_eval)
from .seeding import ReplicateStreams

logger = logging.getLogger(__name__)

Draw = Callable[[np.random.Generator, int], np.ndarray]


@dataclass
class ExperimentContext:
    """Context for experiment execution."""
    config: Any
    run_manager: Any


class ExperimentHandler(ABC):
    """Abstract base class for experiment handlers.

    `execute` receives parameters already coerced by the schema validator and
    returns {"success": True, "rows": [...], "summary": {...}} or
    {"success": False, "error": ...}.
    """

    def __init__(self, context: ExperimentContext):
        self.context = context

    @abstractmethod
    async def execute(self, streams: ReplicateStreams, **params) -> Dict[str, Any]:
        """Run the experiment."""
        pass

    @abstractmethod
    def validate_parameters(self, **params) -> Optional[str]:
        """Cross-parameter checks the schema cannot express. Returns error message if invalid."""
        pass

    async def sample(self, streams: ReplicateStreams, trials: int, draw: Draw) -> np.ndarray:
        """Draw `trials` rows in replicate blocks; row order is fixed by block order."""
        return await self.context.run_manager.map_blocks(streams, trials, draw)

    async def call(self, fn: Callable, *args, **kwargs):
        return await self.context.run_manager.call(fn, *args, **kwargs)


class FieldMaxHandler(ExperimentHandler):
    """Maximum of log|P_N| over an arc, scanned over N."""

    async def execute(self, streams: ReplicateStreams, **params) -> Dict[str, Any]:
        try:
            error = self.validate_parameters(**params)
            if error:
                return {"success": False, "error": error}

            rows = []
            for N in params['N']:
                logger.info(f"field-max: N={N}")
                maxima = await self.sample(streams, params['trials'], lambda rng, size: unitary_field_max_samples(
                    N, size, rng, float(params['arc_length']), params['grid_factor'], params['refine_iters'],
                    params['method']))
                estimate = Estimate.from_samples(maxima)
                rows.append({"N": N, "mean_max": estimate.mean, "stderr": estimate.stderr,
                             "mean_minus_log_N": estimate.mean - math.log(N)})

            summary: Dict[str, Any] = {}
            trend = [r for r in rows if r["N"] >= 3]
            if len({r["N"] for r in trend}) >= 2:
                slope, intercept = fit_linear([math.log(math.log(r["N"])) for r in trend],
                                              [r["mean_minus_log_N"] for r in trend])
                summary = {"loglog_slope": slope, "loglog_intercept": intercept}
            return {"success": True, "rows": rows, "summary": summary}

        except Exception as e:
            logger.error(f"field-max error: {e}")
            return {"success": False, "error": str(e)}

    def validate_parameters(self, **params) -> Optional[str]:
        return None


class CltHandler(ExperimentHandler):
    """Standardized log P_N(A, 0) against the standard normal."""

    async def execute(self, streams: ReplicateStreams, **params) -> Dict[str, Any]:
        try:
            error = self.validate_parameters(**params)
            if error:
                return {"success": False, "error": error}

            group = Group.from_string(params['group'])
            requested = None if params['normalization'] == "auto" else params['normalization']
            beta = None if params['beta'] is None else float(params['beta'])
            normalization, scale = clt_normalization(group, params['N'], params['part'], requested)
            values = await self.sample(streams, params['trials'], lambda rng, size: clt_samples(
                group, params['N'], size, rng, part=params['part'], beta=beta))
            summary = summarize_clt(values / scale, params['part'], params['N'], normalization)
            logger.info(f"clt {group.value} N={params['N']}: KS={summary.ks_distance:.4f}")
            return {"success": True, "rows": [summary.as_dict()], "summary": summary.as_dict()}

        except Exception as e:
            logger.error(f"clt error: {e}")
            return {"success": False, "error": str(e)}

    def validate_parameters(self, **params) -> Optional[str]:
        if params['group'] == "o-minus":
            return "parameters.group: o-minus has a fixed eigenvalue at 1, so log P_N(A, 0) is -inf"
        if params['group'] == "cbe" and params['beta'] is None:
            return "parameters.beta: required for group cbe"
        if params['group'] != "cbe" and params['beta'] is not None:
            return "parameters.beta: only used with group cbe"
        return None


class PairCorrelationHandler(ExperimentHandler):
    """Histogram of rescaled eigenphase differences against the sine kernel."""

    async def execute(self, streams: ReplicateStreams, **params) -> Dict[str, Any]:
        try:
            error = self.validate_parameters(**params)
            if error:
                return {"success": False, "error": error}

            group = Group.from_string(params['group'])
            beta = float(params['beta']) if group is Group.CIRCULAR_BETA else None
            N = params['N']
            phases = await self.sample(streams, params['trials'], lambda rng, size: sample_phase_batch(
                group, N, size, rng, beta=beta))
            result = pair_correlation(phases, float(params['bin_width']), float(params['x_max']))
            kernel = dyson_pair_density(result.centers, N)
            rows = [{"x": x, "density": d, "kernel": q} for x, d, q in zip(result.centers, result.density, kernel)]
            summary = {"max_deviation": float(np.max(np.abs(result.density - kernel))),
                       "n_samples": result.n_samples}
            return {"success": True, "rows": rows, "summary": summary}

        except Exception as e:
            logger.error(f"pair-correlation error: {e}")
            return {"success": False, "error": str(e)}

    def validate_parameters(self, **params) -> Optional[str]:
        if params['group'] == "unitary" and float(params['beta']) != 2.0:
            return "parameters.beta: the unitary group has beta = 2; use group cbe for other values"
        return None


class CovarianceHandler(ExperimentHandler):
    """E[V_N(0) V_N(s)] by Monte Carlo, next to its exact finite-N value."""

    async def execute(self, streams: ReplicateStreams, **params) -> Dict[str, Any]:
        try:
            error = self.validate_parameters(**params)
            if error:
                return {"success": False, "error": error}

            separations = [float(s) for s in params['separations']]
            products = await self.sample(streams, params['trials'], lambda rng, size: covariance_samples(
                params['N'], separations, size, rng, method=params['method']))
            rows = []
            for i, s in enumerate(separations):
                estimate = Estimate.from_samples(products[:, i])
                rows.append({"s": s, "estimate": estimate.mean, "stderr": estimate.stderr,
                             "prediction": covariance_prediction(params['N'], s)})
            return {"success": True, "rows": rows, "summary": {"N": params['N']}}

        except Exception as e:
            logger.error(f"covariance error: {e}")
            return {"success": False, "error": str(e)}

    def validate_parameters(self, **params) -> Optional[str]:
        return None


class MomExactHandler(ExperimentHandler):
    """Exact unitary moments of moments from restricted tableau counts."""

    async def execute(self, streams: ReplicateStreams, **params) -> Dict[str, Any]:
        try:
            error = self.validate_parameters(**params)
            if error:
                return {"success": False, "error": error}

            k, beta = params['k'], params['beta']
            rows = []
            for N in params['N']:
                value = await self.call(mom_exact_unitary, k, beta, N)
                rows.append({"N": N, "value": value})
            return {"success": True, "rows": rows, "summary": {"k": k, "beta": beta}}

        except Exception as e:
            logger.error(f"mom-exact error: {e}")
            return {"success": False, "error": str(e)}

    def validate_parameters(self, **params) -> Optional[str]:
        return None


class MomToeplitzHandler(ExperimentHandler):
    """Moments of moments from Toeplitz determinants integrated over the torus."""

    async def execute(self, streams: ReplicateStreams, **params) -> Dict[str, Any]:
        try:
            error = self.validate_parameters(**params)
            if error:
                return {"success": False, "error": error}

            threads = self.context.config.threads
            rows = []
            for N in params['N']:
                logger.info(f"mom-toeplitz: N={N}")
                value = await self.call(mom_toeplitz, params['k'], float(params['beta']), N,
                                        quad_nodes=params['quad_nodes'], tolerance=float(params['tolerance']),
                                        threads=threads)
                rows.append({"N": N, "value": value})

            summary: Dict[str, Any] = {"regime": closed_forms.classify_regime(params['k'], params['beta']).value}
            if len(params['N']) >= 2:
                summary["loglog_slope"] = fit_loglog_slope([r["N"] for r in rows], [r["value"] for r in rows])
            return {"success": True, "rows": rows, "summary": summary}

        except Exception as e:
            logger.error(f"mom-toeplitz error: {e}")
            return {"success": False, "error": str(e)}

    def validate_parameters(self, **params) -> Optional[str]:
        return None


class MomMonteCarloHandler(ExperimentHandler):
    """Sample mean of g_N(β; A)^k over Haar draws from a classical group."""

    async def execute(self, streams: ReplicateStreams, **params) -> Dict[str, Any]:
        try:
            error = self.validate_parameters(**params)
            if error:
                return {"success": False, "error": error}

            group = Group.from_string(params['group'])
            k, beta = float(params['k']), float(params['beta'])
            rows = []
            for N in params['N']:
                nodes = params['theta_nodes'] or 8 * N
                logger.info(f"mom-mc {group.value}: N={N} with {nodes} angles")
                samples = await self.sample(streams, params['trials'], lambda rng, size: moment_samples(
                    group, k, beta, N, size, nodes, rng))
                estimate = Estimate.from_samples(samples)
                rows.append({"N": N, "mean": estimate.mean, "stderr": estimate.stderr})

            summary: Dict[str, Any] = {}
            if len(params['N']) >= 2:
                summary["loglog_slope"] = fit_loglog_slope([r["N"] for r in rows], [r["mean"] for r in rows])
            return {"success": True, "rows": rows, "summary": summary}

        except Exception as e:
            logger.error(f"mom-mc error: {e}")
            return {"success": False, "error": str(e)}

    def validate_parameters(self, **params) -> Optional[str]:
        nodes = params.get('theta_nodes')
        if nodes is not None:
            largest = max(params['N'])
            if nodes < 4 * largest:
                return f"parameters.theta_nodes: must be >= 4N = {4 * largest}"
        return None


class MomPolynomialHandler(ExperimentHandler):
    """Exact moment-of-moments polynomial, in N (unitary) or in x = 2^n (branching)."""

    async def execute(self, streams: ReplicateStreams, **params) -> Dict[str, Any]:
        try:
            error = self.validate_parameters(**params)
            if error:
                return {"success": False, "error": error}

            build = mom_polynomial if params['model'] == "unitary" else mom_branching_polynomial
            polynomial = await self.call(build, params['k'], params['beta'])
            rows = [{"power": i, "coefficient": c} for i, c in enumerate(polynomial.coeffs)]
            summary = {"variable": polynomial.variable, "degree": polynomial.degree,
                       "leading_coefficient": polynomial.leading_coefficient, "factored": polynomial.factored()}
            return {"success": True, "rows": rows, "summary": summary}

        except Exception as e:
            logger.error(f"mom-poly error: {e}")
            return {"success": False, "error": str(e)}

    def validate_parameters(self, **params) -> Optional[str]:
        return None


class BranchingMomHandler(ExperimentHandler):
    """Exact branching moments of moments over a list of depths."""

    async def execute(self, streams: ReplicateStreams, **params) -> Dict[str, Any]:
        try:
            error = self.validate_parameters(**params)
            if error:
                return {"success": False, "error": error}

            k, beta = params['k'], params['beta']
            rows = []
            for n in params['depth']:
                value = await self.call(mom_branching_exact, k, beta, n, mode=params['mode'])
                rows.append({"n": n, "value": value})

            summary: Dict[str, Any] = {}
            if beta > 0:
                leading = branching_leading_coefficient(k, float(beta), max(params['depth']))
                summary = {"regime": leading.regime.value, "exponent": leading.exponent,
                           "leading_coefficient": leading.value}
            return {"success": True, "rows": rows, "summary": summary}

        except Exception as e:
            logger.error(f"branching-mom error: {e}")
            return {"success": False, "error": str(e)}

    def validate_parameters(self, **params) -> Optional[str]:
        if params['mode'] == "bruteforce":
            exponent = params['k'] * max(params['depth'])
            if exponent > BRUTEFORCE_MAX_EXPONENT:
                return (f"parameters.depth: brute force enumerates 2^(k*n) = 2^{exponent} tuples, "
                        f"must be <= 2^{BRUTEFORCE_MAX_EXPONENT}")
        try:
            beta_squared(params['beta'])
        except (TypeError, ValueError) as e:
            return f"parameters.beta: {e}"
        return None


class BranchingMaxHandler(ExperimentHandler):
    """Mean maxima of the branching random walk (or its independent baseline) and the log n fit."""

    async def execute(self, streams: ReplicateStreams, **params) -> Dict[str, Any]:
        try:
            error = self.validate_parameters(**params)
            if error:
                return {"success": False, "error": error}

            model, sigma2 = params['model'], float(params['sigma2'])
            max_depth = self.context.config.max_leaves_log2
            depths = sorted(set(params['depth']))
            estimates = []
            for n in depths:
                logger.info(f"branching-max {model}: n={n}")
                if model == "brw":
                    tree = TreeConfig(depth=n, sigma2=sigma2, max_depth=max_depth)
                    draw: Draw = lambda rng, size: brw_max_samples(tree, size, rng)
                else:
                    draw = lambda rng, size: rem_max_sample(n, size, rng, sigma2)
                estimates.append(Estimate.from_samples(await self.sample(streams, params['trials'], draw)))

            regression = max_regression(model, depths, estimates, sigma2)
            rows = [{"n": n, "mean_max": e.mean, "stderr": e.stderr} for n, e in zip(depths, estimates)]
            summary = {key: value for key, value in regression.as_dict().items()
                       if key not in ("mean_maxima", "depths")}
            return {"success": True, "rows": rows, "summary": summary}

        except Exception as e:
            logger.error(f"branching-max error: {e}")
            return {"success": False, "error": str(e)}

    def validate_parameters(self, **params) -> Optional[str]:
        if len(set(params['depth'])) < 3:
            return "parameters.depth: the log n fit needs at least 3 distinct depths"
        return None


class FreezingHandler(ExperimentHandler):
    """Normalized free energy across β for the tree or the unitary field."""

    async def execute(self, streams: ReplicateStreams, **params) -> Dict[str, Any]:
        try:
            error = self.validate_parameters(**params)
            if error:
                return {"success": False, "error": error}

            betas = [float(b) for b in params['betas']]
            if params['model'] == "brw":
                tree = TreeConfig(depth=params['depth'], sigma2=float(params['sigma2']),
                                  max_depth=self.context.config.max_leaves_log2)
                samples = await self.sample(streams, params['trials'], lambda rng, size: free_energy_samples(
                    tree, betas, size, rng))
                # σ² rescales the curve: f_σ(β) = s f(sβ) with s² = 2σ²/log 2
                scale = math.sqrt(2 * tree.sigma2 / math.log(2))
            else:
                samples = await self.sample(streams, params['trials'], lambda rng, size: unitary_free_energy_samples(
                    params['N'], betas, size, rng, params['grid_factor']))
                scale = 1.0

            rows = []
            for i, beta in enumerate(betas):
                estimate = Estimate.from_samples(samples[:, i])
                rows.append({"beta": beta, "mean": estimate.mean, "stderr": estimate.stderr,
                             "prediction": scale * closed_forms.freezing_free_energy(scale * beta)})
            frozen = [r["mean"] for r in rows if r["beta"] * scale > 1]
            summary: Dict[str, Any] = {"model": params['model']}
            if len(frozen) >= 2:
                summary["frozen_spread"] = max(frozen) - min(frozen)
            return {"success": True, "rows": rows, "summary": summary}

        except Exception as e:
            logger.error(f"freezing error: {e}")
            return {"success": False, "error": str(e)}

    def validate_parameters(self, **params) -> Optional[str]:
        return None


class ZetaModelHandler(ExperimentHandler):
    """Randomized prime model of ζ: maxima, increment variances, or the covariance profile."""

    async def execute(self, streams: ReplicateStreams, **params) -> Dict[str, Any]:
        try:
            error = self.validate_parameters(**params)
            if error:
                return {"success": False, "error": error}

            variant = ModelVariant.from_string(params['variant'])
            cfg = ModelConfig(level=params['level'], variant=variant, grid_size=params['grid_size'],
                              second_order=params['second_order'])
            quantity = params['quantity']
            trials = params['trials']

            if quantity == "max":
                maxima = await self.sample(streams, trials, lambda rng, size: model_field_batch(
                    cfg, size, rng).max(axis=1))
                report = model_max_report(cfg, maxima)
                rows = [
                    {"quantity": "mean_max", "index": cfg.level, "value": report.mean_max.mean,
                     "stderr": report.mean_max.stderr},
                    {"quantity": "leading", "index": cfg.level, "value": report.leading, "stderr": None},
                    {"quantity": "corrected", "index": cfg.level, "value": report.corrected, "stderr": None},
                ]
                return {"success": True, "rows": rows, "summary": report.as_dict()}

            if quantity == "increments":
                increments = await self.sample(streams, trials, lambda rng, size: model_increments(cfg, size, rng))
                rows = []
                previous = 0.0
                for m in range(1, cfg.level + 1):
                    estimate = Estimate.from_samples(increments[:, m - 1, 0] ** 2)
                    level_variance = model_variance(ModelConfig(level=m, variant=variant,
                                                                second_order=cfg.second_order))
                    rows.append({"quantity": "increment_variance", "index": m, "value": estimate.mean,
                                 "stderr": estimate.stderr})
                    rows.append({"quantity": "increment_prediction", "index": m, "value": level_variance - previous,
                                 "stderr": None})
                    previous = level_variance
                return {"success": True, "rows": rows, "summary": {"level": cfg.level}}

            fields = await self.sample(streams, trials, lambda rng, size: model_field_batch(cfg, size, rng))
            h = cfg.h_grid()
            rows = []
            for j in range(0, cfg.grid_size, max(1, cfg.grid_size // 16)):
                estimate = Estimate.from_samples(fields[:, 0] * fields[:, j])
                rows.append({"quantity": "covariance", "index": j, "value": estimate.mean,
                             "stderr": estimate.stderr})
                rows.append({"quantity": "covariance_prediction", "index": j,
                             "value": model_covariance(cfg, 0.0, float(h[j])), "stderr": None})
            return {"success": True, "rows": rows, "summary": {"variance": model_variance(cfg)}}

        except Exception as e:
            logger.error(f"zeta-model error: {e}")
            return {"success": False, "error": str(e)}

    def validate_parameters(self, **params) -> Optional[str]:
        grid_size = params.get('grid_size')
        if grid_size is not None and grid_size < 1 << params['level']:
            return f"parameters.grid_size: must be >= 2^level = {1 << params['level']}"
        return None


def _mom_prediction(group, k, beta, N):
    prediction = closed_forms.mom_prediction(Group.from_string(group), k, beta, N)
    value = prediction.evaluate(N) if N is not None else prediction.coefficient
    summary = {"regime": prediction.regime.value, "exponent": prediction.exponent,
               "coefficient": prediction.coefficient, "modulating_factor": prediction.modulating_factor,
               "conjectural": prediction.conjectural}
    return value, summary


# formula -> (required keys, evaluation)
CLOSED_FORM_TABLE: Dict[str, tuple] = {
    "keating-snaith": (("N", "beta"), lambda p: closed_forms.keating_snaith_moment(p['N'], p['beta'])),
    "symmetry-coefficient": (("beta",), lambda p: closed_forms.symmetry_coefficient(
        Group.from_string(p['group']), p['beta'])),
    "selberg": (("a", "b", "alpha", "beta", "gamma", "n"), lambda p: closed_forms.selberg_integral(
        float(p['a']), float(p['b']), float(p['alpha']), float(p['beta']), float(p['gamma']), p['n'])),
    "fyodorov-bouchaud": (("k", "beta"), lambda p: closed_forms.fyodorov_bouchaud_moment(
        float(p['k']), float(p['beta']))),
    "critical-coefficient": (("k",), lambda p: closed_forms.critical_coefficient(float(p['k']))),
    "bramson": (("n",), lambda p: closed_forms.bramson_prediction(p['n'], float(p['sigma2']))),
    "iid-max": (("n",), lambda p: closed_forms.iid_max_prediction(p['n'], float(p['sigma2']))),
    "arithmetic-factor": (("beta",), lambda p: closed_forms.zeta_arithmetic_factor(float(p['beta']), p['p_max'])),
    "freezing": (("beta",), lambda p: closed_forms.freezing_free_energy(float(p['beta']))),
    "zeta": (("t",), lambda p: zeta_eval(float(p['t']))),
}


class ClosedFormHandler(ExperimentHandler):
    """Evaluate one closed-form predictor."""

    async def execute(self, streams: ReplicateStreams, **params) -> Dict[str, Any]:
        try:
            error = self.validate_parameters(**params)
            if error:
                return {"success": False, "error": error}

            formula = params['formula']
            summary: Dict[str, Any] = {}
            if formula == "mom-prediction":
                value, summary = _mom_prediction(params['group'], params['k'], params['beta'], params['N'])
            else:
                value = await self.call(CLOSED_FORM_TABLE[formula][1], params)
            return {"success": True, "rows": [{"formula": formula, "value": value}], "summary": summary}

        except Exception as e:
            logger.error(f"closed-form error: {e}")
            return {"success": False, "error": str(e)}

    def validate_parameters(self, **params) -> Optional[str]:
        formula = params['formula']
        required = ("k", "beta") if formula == "mom-prediction" else CLOSED_FORM_TABLE[formula][0]
        missing = [key for key in required if params.get(key) is None]
        if missing:
            return "; ".join(f"parameters.{key}: required for formula {formula}" for key in missing)
        return None


class SecularHandler(ExperimentHandler):
    """Second moment of sums of products of secular coefficients."""

    async def execute(self, streams: ReplicateStreams, **params) -> Dict[str, Any]:
        try:
            error = self.validate_parameters(**params)
            if error:
                return {"success": False, "error": error}

            eta, m = params['eta'], params['m']
            rows = []
            for N in params['N']:
                samples = await self.sample(streams, params['trials'], lambda rng, size: secular_sum_samples(
                    eta, m, N, size, rng))
                estimate = Estimate.from_samples(samples)
                rows.append({"N": N, "mean": estimate.mean, "stderr": estimate.stderr})
            return {"success": True, "rows": rows, "summary": {"eta": eta, "m": m}}

        except Exception as e:
            logger.error(f"secular error: {e}")
            return {"success": False, "error": str(e)}

    def validate_parameters(self, **params) -> Optional[str]:
        return None


class ExperimentHandlerFactory:
    """Factory for creating experiment handlers."""

    HANDLERS = {
        ExperimentKind.FIELD_MAX: FieldMaxHandler,
        ExperimentKind.CLT: CltHandler,
        ExperimentKind.PAIR_CORRELATION: PairCorrelationHandler,
        ExperimentKind.COVARIANCE: CovarianceHandler,
        ExperimentKind.MOM_EXACT: MomExactHandler,
        ExperimentKind.MOM_TOEPLITZ: MomToeplitzHandler,
        ExperimentKind.MOM_MC: MomMonteCarloHandler,
        ExperimentKind.MOM_POLY: MomPolynomialHandler,
        ExperimentKind.BRANCHING_MOM: BranchingMomHandler,
        ExperimentKind.BRANCHING_MAX: BranchingMaxHandler,
        ExperimentKind.FREEZING: FreezingHandler,
        ExperimentKind.ZETA_MODEL: ZetaModelHandler,
        ExperimentKind.CLOSED_FORM: ClosedFormHandler,
        ExperimentKind.SECULAR: SecularHandler,
    }

    def __init__(self, config: Any, run_manager: Any):
        self.context = ExperimentContext(config=config, run_manager=run_manager)

    def create_handler(self, kind) -> ExperimentHandler:
        """Create a handler for the given experiment kind (enum or name)."""
        if isinstance(kind, str):
            kind = ExperimentKind.from_string(kind)
        handler_class = self.HANDLERS.get(kind)
        if not handler_class:
            raise ValueError(f"Unknown experiment: {kind}")
        return handler_class(self.context)
