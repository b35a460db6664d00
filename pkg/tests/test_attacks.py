"""Tests ``attacks`` module."""

import pytest

from fsm_watermark import attacks
from fsm_watermark.attacks import MachineOracle, OracleBudget
from fsm_watermark.decomposition import block_number, build_independent, fixed_partitions_lprk
from fsm_watermark.errors import TranscriptError, UnsupportedOracleError
from fsm_watermark.fsm import Fsm, run
from fsm_watermark.matrix_crypt import compose_cascade
from fsm_watermark.redux import branch_schedule
from fsm_watermark.verification import bounded_equiv, equivalent

from . import machine_factory


## oracle
def test_oracle_budget_raise():
    """Test non positive budgets"""

    with pytest.raises(ValueError) as error:
        OracleBudget(0)
    assert "'max_probes' (0) must be >= 1." in str(error.value)

    with pytest.raises(ValueError) as error:
        OracleBudget(patience=-2)
    assert "'patience' (-2) must be >= 1." in str(error.value)


def test_machine_oracle():
    """Test the black box counts probes and steps and stays halted"""

    machine = Fsm([0, 1], ["0", "1"], ["a", "b"], 0, {(0, "0"): (1, "a"), (1, "1"): (0, "b")})
    oracle = MachineOracle(machine)
    outputs = [oracle.step("0"), oracle.step("0"), oracle.step("1")]
    oracle.reset()

    assert (
        outputs == ["a", None, None] and
        oracle.step("0") == "a" and
        oracle.step("1") == "b" and
        oracle.probes == 1 and
        oracle.steps == 5 and
        oracle.inputs == ("0", "1")
    )


def test_machine_oracle_raise():
    """Test a one-shot oracle"""

    oracle = MachineOracle(machine_factory.toggler(), resettable=False)

    with pytest.raises(UnsupportedOracleError) as error:
        oracle.reset()
    assert "the oracle cannot be reset." in str(error.value)


def test_observed_state():
    """Test states read off outputs"""

    assert (
        attacks.observed_state("01|10") == 2 and
        attacks.observed_state("0101") == 5
    )


## informed attack
@pytest.mark.parametrize("mode, n, k", [("fixed", 1, 1), ("fixed", 2, 2), ("fixed", 5, 3),
                                        ("fixed", 4, 4), ("matrix", 5, 3)])
def test_informed_attack_rebuilds_the_watermark(generate_package, mode, n, k):
    """Test the reconstruction behaves like the shipped machine"""

    package, _ = generate_package(n, k, mode)
    oracle = MachineOracle(package.watermark)
    rebuilt = attacks.informed_attack(oracle, package.tap.chi)

    assert (
        rebuilt.name == "informed" and
        oracle.probes == 2 ** package.tap.chi and
        bounded_equiv(rebuilt, package.watermark, n + 1) and
        equivalent(rebuilt, package.watermark)
    )


@pytest.mark.parametrize("n", range(1, 7))
@pytest.mark.parametrize("k", range(1, 5))
def test_informed_attack_on_every_small_shape(generate_package, n, k):
    """Test 2^chi probes rebuild a machine agreeing for n + 1 steps"""

    package, _ = generate_package(n, k)
    oracle = MachineOracle(package.watermark)
    rebuilt = attacks.informed_attack(oracle, package.tap.chi)

    assert (
        oracle.probes <= 2 ** package.tap.chi and
        bounded_equiv(rebuilt, package.watermark, n + 1)
    )


def test_informed_attack_on_fixed_independent(generate_package):
    """Test column blocks are rebuilt with their tick loop"""

    package, secret = generate_package(5, 3)
    rebuilt = attacks.informed_attack(MachineOracle(package.watermark), 2)

    assert (
        rebuilt.reset == 3 and
        rebuilt.n_states == 4 and
        secret.partitions.pi_i.number_of(secret.redux.reset) == 3 and
        all(rebuilt.step(column, "00")[0] == column for column in range(3)) and
        all(rebuilt.step(column, "01") is None for column in range(3))
    )


def test_informed_attack_halting_start():
    """Test a machine halting on every code"""

    rebuilt = attacks.informed_attack(
        MachineOracle(Fsm([0], ["0", "1"], ["x"], 0, {})), 1)

    assert (
        rebuilt.n_states == 1 and
        rebuilt.inputs == ("0", "1") and
        not rebuilt.table
    )


def test_informed_attack_raise():
    """Test a one-shot oracle"""

    with pytest.raises(UnsupportedOracleError) as error:
        attacks.informed_attack(MachineOracle(machine_factory.toggler(), resettable=False), 1)
    assert "the informed attack resets the oracle once per code." in str(error.value)


## output count
def test_adversarial_extension_of_nothing():
    """Test an empty transcript gives a one-state machine"""

    extension = attacks.adversarial_extension([])

    assert (
        extension.n_states == 1 and
        extension.outputs == ("0",) and
        extension.step(0, "0") == (0, "0")
    )


def test_adversarial_extension_replays_runs():
    """Test the extension agrees with every run and holds one more output"""

    for seed in range(100):
        runs = machine_factory.random_runs(seed, n_runs=8, max_length=6, n_outputs=3)
        observed = {output for observed_run in runs for _, output in observed_run}
        extension = attacks.adversarial_extension(runs, j=len(observed))
        for observed_run in runs:
            result = run(extension, [symbol for symbol, _ in observed_run])
            assert result.outputs == tuple(output for _, output in observed_run)
        assert (
            len(extension.outputs) == len(observed) + 1 and
            set(extension.outputs) - observed != set()
        )


def test_adversarial_extension_fresh_output_is_reachable():
    """Test the fresh output is emitted after the longest run"""

    runs = [[("0", "0"), ("1", "1")], [("1", "1")]]
    extension = attacks.adversarial_extension(runs, j=2)

    assert (
        extension.outputs == ("0", "1", "10") and
        run(extension, ["0", "1", "0"]).outputs == ("0", "1", "10")
    )


def test_adversarial_extension_raise():
    """Test inconsistent transcripts"""

    with pytest.raises(TranscriptError) as error:
        attacks.adversarial_extension([[("0", "a")], [("0", "b")]])
    assert "run 1 emits 'b' where another run emitted 'a' after the same inputs." in str(
        error.value)

    with pytest.raises(TranscriptError) as error:
        attacks.adversarial_extension([[("0", "a"), ("0", "b")]], j=5)
    assert "'j' (5) does not match the 2 observed outputs." in str(error.value)


@pytest.mark.parametrize("n, k", [(5, 3), (2, 2), (4, 4)])
def test_estimate_output_count_of_blocks(generate_package, n, k):
    """Test random probing finds every block of the fixed independent machine"""

    package, _ = generate_package(n, k)
    oracle = MachineOracle(package.watermark)
    estimate = attacks.estimate_output_count(oracle, OracleBudget(5000, n + 2, 200), seed=1,
                                             projection=block_number)

    assert (
        estimate.count == k + 1 and
        estimate.probes == oracle.probes and
        estimate.probes <= 5000 and
        "heuristic" in estimate.note
    )


@pytest.mark.parametrize("n, k", [(5, 3), (2, 2), (4, 4)])
def test_estimate_output_count_frequency(generate_package, n, k):
    """Test at least 95 of 100 seeds find every block"""

    package, _ = generate_package(n, k)
    found = 0
    for seed in range(100):
        estimate = attacks.estimate_output_count(MachineOracle(package.watermark),
                                                 OracleBudget(5000, n + 2, 200), seed=seed,
                                                 projection=block_number)
        found += estimate.count == k + 1
        assert estimate.count <= k + 1

    assert found >= 95


def test_estimate_output_count_stops_on_patience(host):
    """Test probing stops once no output is new"""

    oracle = MachineOracle(host)
    estimate = attacks.estimate_output_count(oracle, OracleBudget(1000, 10, 5), seed=2)

    assert (
        estimate.count == 2 and
        estimate.probes < 1000 and
        estimate.steps == oracle.steps
    )


## dependent machine
def test_candidate_dependent_machines(generate_lprk):
    """Test several dependent machines complete the same independent machine"""

    machine = generate_lprk(2, 2)
    pi_i = fixed_partitions_lprk(machine, 2, 2).pi_i
    independent = build_independent(machine, pi_i)
    candidates = attacks.candidate_dependent_machines(machine, pi_i)

    assert (
        len(candidates) >= 2 and
        len({pair for pair, _ in candidates}) == len(candidates) and
        all(pair.pi_i == pi_i for pair, _ in candidates)
    )
    for _, dependent in candidates:
        cascade = compose_cascade(independent, dependent)
        for branch in range(len(machine.inputs)):
            schedule = branch_schedule(machine, branch, 3)
            assert run(cascade, schedule).outputs == run(machine, schedule).outputs
