"""Tests ``verification`` module."""

import pytest

from fsm_watermark import verification
from fsm_watermark.errors import AlphabetMismatchError
from fsm_watermark.fsm import Fsm
from fsm_watermark.matrix_crypt import compose_cascade
from fsm_watermark.run_config import SETTING_SEED
from fsm_watermark.verification import Verdict

from . import machine_factory

SHAPES = [("matrix", 5, 3), ("fixed", 5, 3), ("optimal", 3, 3), ("matrix", 1, 1),
          ("fixed", 2, 2)]


## verdicts
def test_verdict_compare():
    """Test pass, mismatch and prefix"""

    passed = Verdict.compare(["a", "b"], ("a", "b"))
    mismatch = Verdict.compare(["a", "b", "c"], ["a", "x", "c"])
    prefix = Verdict.compare(["a", "b"], ["a"])

    assert (
        passed.passed and passed.divergence is None and
        not mismatch.passed and mismatch.divergence == 1 and
        not prefix.passed and prefix.divergence == 1 and
        prefix.observed == ("a",)
    )


def test_verdict_report():
    """Test the text report"""

    assert (
        Verdict.compare(["01", "10"], ["01", "11"]).report() ==
        "verdict: fail\ndivergence: 1\nexpected: 01 10\nobserved: 01 11\n" and
        Verdict.compare(["0"], ["0"]).report() ==
        "verdict: pass\ndivergence: -\nexpected: 0\nobserved: 0\n"
    )


def test_failed_branches():
    """Test failed branch listing"""

    verdicts = {0: Verdict.compare("a", "a"), 1: Verdict.compare("a", "b"),
                2: Verdict.compare("ab", "a")}

    assert verification.failed_branches(verdicts) == [1, 2]


## protocol
@pytest.mark.parametrize("mode, n, k", SHAPES)
def test_genuine_package_passes(generate_package, mode, n, k):
    """Test every branch of a genuine package passes in parallel"""

    package, secret = generate_package(n, k, mode)
    verdicts = verification.verify_all_branches(package, secret)

    assert (
        len(verdicts) == 2 ** secret.redux.input_width and
        verification.failed_branches(verdicts) == [] and
        all(len(verdict.expected) == n for verdict in verdicts.values()) and
        not verification.verify_foreign(package, secret)
    )


@pytest.mark.parametrize("mode, n, k", SHAPES)
def test_genuine_package_passes_scanned(generate_package, mode, n, k):
    """Test the same through the TAP"""

    package, secret = generate_package(n, k, mode)
    verdicts = verification.verify_all_branches(package, secret, scan_seed=SETTING_SEED)

    assert verification.failed_branches(verdicts) == []


def test_scanned_and_parallel_agree(generate_package):
    """Test both access paths decode the same outputs, whatever the test length"""

    package, secret = generate_package(5, 3)
    for length in (0, 1, 3, 6, 9):
        for branch in range(4):
            parallel = verification.watermark_test(package, secret, branch, length)
            scanned = verification.watermark_test(package, secret, branch, length, scan_seed=3)
            assert parallel == scanned and parallel.passed


@pytest.mark.parametrize("mode", ["matrix", "fixed"])
def test_random_like_machine_is_foreign(generate_package, mode):
    """Test random machines with the package interface are rejected"""

    package, secret = generate_package(5, 3, mode)
    for seed in range(10):
        counterfeit = package.with_watermark(verification.random_like(package.watermark, seed))
        assert verification.verify_foreign(counterfeit, secret)


def test_foreign_secret(generate_package):
    """Test a secret of another shape"""

    package, _ = generate_package(5, 3)
    _, other = generate_package(2, 1)

    assert verification.verify_foreign(package, other)

    with pytest.raises(AlphabetMismatchError) as error:
        verification.watermark_test(package, other, 0)
    assert "wrong secret for this package." in str(error.value)


def test_watermark_test_raise(generate_package):
    """Test a branch out of range"""

    package, secret = generate_package(5, 3)

    with pytest.raises(ValueError) as error:
        verification.watermark_test(package, secret, 4)
    assert "branch 4 is out of range [0;3]." in str(error.value)


@pytest.mark.parametrize("mode, n, k", [("matrix", 1, 1), ("matrix", 2, 2), ("matrix", 5, 3),
                                        ("fixed", 2, 2), ("fixed", 3, 2), ("fixed", 2, 3),
                                        ("fixed", 5, 3)])
def test_undetected_tampering_is_harmless(generate_package, mode, n, k):
    """Test a single-edge tampering that passes every branch keeps the decoded behaviour"""

    package, secret = generate_package(n, k, mode)
    genuine = compose_cascade(package.watermark, secret.decoder)
    detected = 0
    for _, _, _, tampered in verification.single_edge_tamperings(package.watermark):
        verdicts = verification.verify_all_branches(package.with_watermark(tampered), secret)
        if verification.failed_branches(verdicts):
            detected += 1
        else:
            assert verification.equivalent(compose_cascade(tampered, secret.decoder), genuine)
    assert detected > 0


## machine comparisons
def test_bounded_equiv(host):
    """Test a redirection only visible after four steps"""

    tampered = host.replace_transition(3, "0", 0)

    assert (
        verification.bounded_equiv(host, host, 10) and
        verification.bounded_equiv(host, tampered, 3) and
        not verification.bounded_equiv(host, tampered, 4) and
        not verification.equivalent(host, tampered) and
        verification.equivalent(host, host)
    )


def test_equivalent_unrolled_toggler():
    """Test machines of different sizes with the same behaviour"""

    unrolled = Fsm([0, 1, 2, 3], ["0"], ["0", "1"], 0,
                   {(0, "0"): (1, "0"), (1, "0"): (2, "1"), (2, "0"): (3, "0"),
                    (3, "0"): (0, "1")})

    assert verification.equivalent(machine_factory.toggler(), unrolled)


def test_equivalent_halting():
    """Test halting is part of the behaviour"""

    halting = Fsm([0, 1], ["0"], ["0", "1"], 0, {(0, "0"): (1, "0")})
    also_halting = Fsm([0, 1, 2], ["0"], ["0", "1"], 0, {(0, "0"): (2, "0")})

    assert (
        verification.equivalent(halting, also_halting) and
        not verification.equivalent(halting, machine_factory.toggler()) and
        verification.bounded_equiv(halting, machine_factory.toggler(), 1)
    )


def test_equivalent_raise(host):
    """Test different input alphabets"""

    with pytest.raises(AlphabetMismatchError) as error:
        verification.equivalent(host, machine_factory.toggler())
    assert "machines compared on different input alphabets." in str(error.value)


## negative controls
def test_random_like(host):
    """Test the random machine keeps the interface"""

    counterfeit = verification.random_like(host, seed=3)

    assert (
        counterfeit.states == host.states and
        counterfeit.inputs == host.inputs and
        counterfeit.outputs == host.outputs and
        counterfeit.reset == host.reset and
        set(counterfeit.table) == set(host.table) and
        counterfeit.name == "random-3" and
        counterfeit == verification.random_like(host, seed=3)
    )


def test_single_edge_tamperings(host):
    """Test every redirection is listed once"""

    tamperings = list(verification.single_edge_tamperings(host))

    assert (
        len(tamperings) == 16 * 7 and
        len({machine for *_, machine in tamperings}) == 16 * 7 and
        tamperings[0][:3] == (0, "0", 0) and
        tamperings[0][3].step(0, "0") == (0, "0")
    )
