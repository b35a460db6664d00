"""Embed, verify and attack watermarks of the bundled host in the three modes."""

from pathlib import Path
import shutil

from fsm_watermark import attacks, bundle, data, utils, verification


def main():
    """Run the study"""

    host = data.read_fsm(Path(__file__).absolute().parent / "host_machine.kiss2")

    output_dirname = Path(__file__).absolute().parent / "results"
    if output_dirname.exists():
        shutil.rmtree(output_dirname)
    output_dirname.mkdir(parents=False, exist_ok=True)

    utils.set_verbosity(utils.INFO)

    # the lattice search of the optimal mode is capped, keep its LPR(k) small
    shapes = {"matrix": (5, 3), "fixed": (5, 3), "optimal": (3, 3)}
    for mode, (n, k) in shapes.items():
        package, secret = bundle.embed_watermark(host, n, k, mode=mode)
        bundle.write_package(package, output_dirname / f"{mode}_package.json")
        bundle.write_secret(secret, output_dirname / f"{mode}_secret.json")

        verdicts = verification.verify_all_branches(package, secret)
        scanned = verification.verify_all_branches(package, secret, scan_seed=1149)
        foreign = verification.verify_foreign(
            package.with_watermark(verification.random_like(package.watermark, seed=3)), secret)

        estimate = attacks.estimate_output_count(
            attacks.MachineOracle(package.watermark), attacks.OracleBudget(2000, n + 2, 200),
            seed=11, projection=attacks.observed_state)
        print(f"{mode}: failed branches {verification.failed_branches(verdicts)}, "
              f"through the TAP {verification.failed_branches(scanned)}, "
              f"random machine rejected {foreign}, {estimate.count} outputs estimated")

        assert (
            not verification.failed_branches(verdicts) and
            not verification.failed_branches(scanned)
        )


if __name__ == "__main__":

    main()
