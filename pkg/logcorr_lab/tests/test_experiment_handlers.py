"""Tests for experiment handlers."""

from fractions import Fraction
from unittest.mock import AsyncMock, Mock

import numpy as np
import pytest

from ..config import ExperimentKind, RunnerConfig
from ..experiment_handlers import (
    BranchingMaxHandler, BranchingMomHandler, ClosedFormHandler, CltHandler, ExperimentContext,
    ExperimentHandlerFactory, MomExactHandler, MomMonteCarloHandler, MomPolynomialHandler, MomToeplitzHandler,
    PairCorrelationHandler, SecularHandler, ZetaModelHandler,
)
from ..mom import mom_toeplitz
from ..run_manager import RunManager
from ..seeding import ReplicateStreams


@pytest.fixture
def run_manager():
    manager = RunManager(RunnerConfig(threads=1, block_size=16))
    yield manager
    manager.close()


@pytest.fixture
def context(run_manager):
    context = Mock(spec=ExperimentContext)
    context.config = run_manager.config
    context.run_manager = run_manager
    return context


@pytest.fixture
def streams():
    return ReplicateStreams(11, "test")


class TestMomExactHandler:
    """Test exact unitary moments of moments."""

    @pytest.mark.asyncio
    async def test_rows(self, context, streams):
        """Test values follow (N+1)(N+2)(N+3)/6, including the trivial group."""
        handler = MomExactHandler(context)
        result = await handler.execute(streams, k=2, beta=1, N=[0, 1, 2, 3])
        assert result["success"] is True
        assert [row["value"] for row in result["rows"]] == [1, 4, 10, 20]
        assert result["summary"] == {"k": 2, "beta": 1}

    @pytest.mark.asyncio
    async def test_failure_is_reported(self, streams):
        """Test exceptions in the pool become error dicts."""
        context = Mock(spec=ExperimentContext)
        context.run_manager = Mock()
        context.run_manager.call = AsyncMock(side_effect=RuntimeError("pool down"))
        handler = MomExactHandler(context)
        result = await handler.execute(streams, k=2, beta=1, N=[1])
        assert result == {"success": False, "error": "pool down"}


class TestMomToeplitzHandler:
    """Test Toeplitz moments of moments."""

    @pytest.mark.asyncio
    async def test_quadrature_runs_on_the_pool(self, streams):
        """Test each N is computed through the run manager, with the runner's thread count."""
        context = Mock(spec=ExperimentContext)
        context.config = RunnerConfig(threads=3, block_size=16)
        context.run_manager = Mock()
        context.run_manager.call = AsyncMock(side_effect=[20.0, 35.0])
        handler = MomToeplitzHandler(context)
        result = await handler.execute(streams, k=2, beta=1, N=[3, 4], quad_nodes=64, tolerance=1e-8)
        assert result["success"] is True
        assert [row["value"] for row in result["rows"]] == [20.0, 35.0]
        first = context.run_manager.call.await_args_list[0]
        assert first.args == (mom_toeplitz, 2, 1.0, 3)
        assert first.kwargs == {"quad_nodes": 64, "tolerance": 1e-8, "threads": 3}

    @pytest.mark.asyncio
    async def test_values(self, context, streams):
        """Test MoM(2, 1) at N = 2 through the real pool."""
        handler = MomToeplitzHandler(context)
        result = await handler.execute(streams, k=2, beta=1, N=[2], quad_nodes=64, tolerance=1e-8)
        assert result["rows"][0]["value"] == pytest.approx(10.0, rel=1e-8)


class TestZetaModelHandler:
    """Test the randomized prime model."""

    @pytest.mark.asyncio
    async def test_covariance_rows(self, context, streams):
        """Test quantity covariance reports the profile next to its prediction."""
        handler = ZetaModelHandler(context)
        result = await handler.execute(streams, level=2, variant="steinhaus", grid_size=None, second_order=False,
                                       trials=200, quantity="covariance")
        assert result["success"] is True
        assert {row["quantity"] for row in result["rows"]} == {"covariance", "covariance_prediction"}
        assert result["rows"][0]["index"] == 0
        assert result["rows"][0]["value"] > 0

class TestMomPolynomialHandler:
    """Test polynomial coefficients as rows."""

    @pytest.mark.asyncio
    async def test_unitary(self, context, streams):
        """Test the k=2, β=1 unitary polynomial."""
        handler = MomPolynomialHandler(context)
        result = await handler.execute(streams, k=2, beta=1, model="unitary")
        assert result["success"] is True
        assert [row["coefficient"] for row in result["rows"]] == [
            Fraction(1), Fraction(11, 6), Fraction(1), Fraction(1, 6)]
        assert result["summary"]["factored"] == "(N + 1)*(N + 2)*(N + 3)/6"

    @pytest.mark.asyncio
    async def test_branching(self, context, streams):
        """Test the k=2, β=1 branching polynomial in x = 2^n."""
        handler = MomPolynomialHandler(context)
        result = await handler.execute(streams, k=2, beta=1, model="branching")
        assert [row["coefficient"] for row in result["rows"]] == [0, 0, Fraction(-1, 2), Fraction(3, 2)]


class TestClosedFormHandler:
    """Test closed-form evaluation."""

    @pytest.mark.asyncio
    async def test_keating_snaith(self, context, streams):
        """Test E|P_2|^2 = 3."""
        handler = ClosedFormHandler(context)
        result = await handler.execute(streams, formula="keating-snaith", N=2, beta=1)
        assert result["success"] is True
        assert result["rows"] == [{"formula": "keating-snaith", "value": 3}]

    @pytest.mark.asyncio
    async def test_mom_prediction_summary(self, context, streams):
        """Test the regime is reported next to the prediction."""
        handler = ClosedFormHandler(context)
        result = await handler.execute(streams, formula="mom-prediction", group="unitary", k=2, beta=1, N=None)
        assert result["success"] is True
        assert "regime" in result["summary"]
        assert result["summary"]["exponent"] == 3

    def test_missing_parameters(self, context):
        """Test each missing formula input is named."""
        handler = ClosedFormHandler(context)
        error = handler.validate_parameters(formula="selberg", a=1.0, b=1.0, n=2)
        assert "parameters.alpha: required for formula selberg" in error
        assert "parameters.gamma: required for formula selberg" in error
        assert handler.validate_parameters(formula="keating-snaith", N=2, beta=1) is None


class TestSecularHandler:
    """Test secular coefficient sums."""

    @pytest.mark.asyncio
    async def test_degree_zero(self, context, streams):
        """Test Sc_0 = 1 so the second moment is exactly one."""
        handler = SecularHandler(context)
        result = await handler.execute(streams, eta=1, m=0, N=[3], trials=40)
        assert result["success"] is True
        assert result["rows"][0]["mean"] == pytest.approx(1.0)

    @pytest.mark.asyncio
    async def test_beyond_degree(self, context, streams):
        """Test sums past degree ηN vanish."""
        handler = SecularHandler(context)
        result = await handler.execute(streams, eta=2, m=7, N=[3], trials=20)
        assert result["rows"][0]["mean"] == 0.0


class TestCrossParameterChecks:
    """Test checks the parameter schema cannot express."""

    def test_clt_o_minus(self, context):
        """Test O⁻ is refused for the CLT."""
        error = CltHandler(context).validate_parameters(group="o-minus", beta=None)
        assert error.startswith("parameters.group")

    def test_clt_beta_only_for_cbe(self, context):
        """Test β is required for CβE and refused otherwise."""
        handler = CltHandler(context)
        assert handler.validate_parameters(group="cbe", beta=None) == "parameters.beta: required for group cbe"
        assert handler.validate_parameters(group="unitary", beta=2.0) == "parameters.beta: only used with group cbe"
        assert handler.validate_parameters(group="symplectic", beta=None) is None

    def test_pair_correlation_unitary_beta(self, context):
        """Test the unitary group only takes β = 2."""
        handler = PairCorrelationHandler(context)
        assert handler.validate_parameters(group="unitary", beta=2.0) is None
        assert handler.validate_parameters(group="unitary", beta=4.0).startswith("parameters.beta")

    def test_mom_mc_theta_nodes(self, context):
        """Test too few angles per draw are refused."""
        handler = MomMonteCarloHandler(context)
        assert handler.validate_parameters(theta_nodes=10, N=[2, 4]) == "parameters.theta_nodes: must be >= 4N = 16"
        assert handler.validate_parameters(theta_nodes=None, N=[4]) is None

    def test_branching_bruteforce_limit(self, context):
        """Test brute force refuses more than 2^24 tuples."""
        handler = BranchingMomHandler(context)
        error = handler.validate_parameters(mode="bruteforce", k=3, beta=1, depth=[4, 10])
        assert error.startswith("parameters.depth: brute force enumerates 2^(k*n) = 2^30")
        assert handler.validate_parameters(mode="bruteforce", k=2, beta=1, depth=[4]) is None

    def test_branching_max_depths(self, context):
        """Test the log n fit needs three distinct depths."""
        handler = BranchingMaxHandler(context)
        assert handler.validate_parameters(depth=[10, 12, 12]).startswith("parameters.depth")
        assert handler.validate_parameters(depth=[10, 12, 14]) is None

    def test_zeta_model_grid(self, context):
        """Test the h-grid must resolve the finest scale."""
        handler = ZetaModelHandler(context)
        assert handler.validate_parameters(level=3, grid_size=4) == "parameters.grid_size: must be >= 2^level = 8"
        assert handler.validate_parameters(level=3, grid_size=None) is None


class TestSampling:
    """Test replicate blocks through the run manager."""

    @pytest.mark.asyncio
    async def test_sample_shape_and_order(self, context):
        """Test blocks are concatenated in replicate order."""
        handler = SecularHandler(context)
        draw = lambda rng, size: rng.standard_normal(size)
        first = await handler.sample(ReplicateStreams(5, "order"), 40, draw)
        second = await handler.sample(ReplicateStreams(5, "order"), 40, draw)
        assert first.shape == (40,)
        np.testing.assert_array_equal(first, second)

    @pytest.mark.asyncio
    async def test_successive_samples_differ(self, context):
        """Test a second scan point draws fresh replicates."""
        handler = SecularHandler(context)
        streams = ReplicateStreams(5, "order")
        draw = lambda rng, size: rng.standard_normal(size)
        first = await handler.sample(streams, 20, draw)
        second = await handler.sample(streams, 20, draw)
        assert not np.array_equal(first, second)


class TestExperimentHandlerFactory:
    """Test handler dispatch."""

    def test_create_by_name(self, run_manager):
        """Test handlers are created from names and enums."""
        factory = ExperimentHandlerFactory(run_manager.config, run_manager)
        assert isinstance(factory.create_handler("secular"), SecularHandler)
        assert isinstance(factory.create_handler(ExperimentKind.MOM_EXACT), MomExactHandler)

    def test_every_kind_has_a_handler(self, run_manager):
        """Test no experiment kind is left without a handler."""
        factory = ExperimentHandlerFactory(run_manager.config, run_manager)
        for kind in ExperimentKind:
            assert factory.create_handler(kind).context is factory.context

    def test_unknown(self, run_manager):
        """Test unknown experiments raise."""
        factory = ExperimentHandlerFactory(run_manager.config, run_manager)
        with pytest.raises(ValueError, match="Unknown experiment"):
            factory.create_handler("spectral-form-factor")
