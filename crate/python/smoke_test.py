#!/usr/bin/env python3
"""Smoke test for the qpmkit_py extension module.

Builds are loaded straight from the cargo target directory:

    cargo build -p qpmkit-py --release
    python3 python/smoke_test.py

Each check prints one PASS line; the script exits nonzero on the first
failure.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO / "target" / "release" / "libqpmkit_py.so",
        REPO / "target" / "debug" / "libqpmkit_py.so",
    ]
    lib = next((p for p in candidates if p.exists()), None)
    if lib is None:
        sys.exit("libqpmkit_py.so not found; run `cargo build -p qpmkit-py --release` first")
    stage = Path(tempfile.mkdtemp(prefix="qpmkit_py_"))
    shutil.copy(lib, stage / "qpmkit_py.so")
    sys.path.insert(0, str(stage))
    import qpmkit_py

    return qpmkit_py


CHECKS = []


def check(name):
    def wrap(fn):
        CHECKS.append((name, fn))
        return fn

    return wrap


qpm = load_module()


@check("poling period is in the tens of microns")
def _(m=qpm):
    period = m.poling_period_um()
    assert 40.0 < period < 50.0, period


@check("apodized design tracks the target")
def _(m=qpm):
    design = m.design_apodized(length_mm=30.0, sigma_mm=6.38)
    assert abs(design.total_length_mm - 30.0) < 1e-6
    assert design.domain_count > 100
    assert all(w > 0 for w in design.widths_um)
    assert set(design.signs) <= {-1, 1}
    eff = design.effective_nonlinearity()
    assert 0.5 < eff < 1.0, eff


@check("domain CSV round trip is exact")
def _(m=qpm):
    design = m.design_apodized(length_mm=10.0)
    with tempfile.TemporaryDirectory() as d:
        path = str(Path(d) / "domains.csv")
        design.save_csv(path)
        back = m.DomainConfiguration.load_csv(path)
        assert back.widths_um == design.widths_um
        assert back.signs == design.signs


@check("target amplitude is symmetric about the crystal centre")
def _(m=qpm):
    full = m.target_amplitude(6.38, 30.0, 30.0)
    half = m.target_amplitude(6.38, 30.0, 15.0)
    assert abs(half - 0.5 * full) < 1e-12
    assert abs(full - 2.4597088) < 1e-6, full


@check("apodized crystal beats the periodic one in purity")
def _(m=qpm):
    aktp = m.simulate(m.design_apodized(), grid_points=128)
    ppktp = m.simulate(m.design_periodic(length_mm=22.0), grid_points=128)
    assert aktp.purity > 0.98, aktp.purity
    assert aktp.purity - ppktp.purity >= 0.08
    coeffs = aktp.schmidt_coefficients(4)
    assert coeffs[0] > 0.99
    # Like-arm self visibility equals the purity.
    v = m.visibility(aktp, aktp, arm="idler-idler")
    assert abs(v - aktp.purity) < 1e-9


@check("gentle filtering transmits almost everything")
def _(m=qpm):
    sim = m.simulate(m.design_apodized(), grid_points=128, filter_fwhm_nm=7.4)
    assert sim.transmitted_fraction > 0.95


@check("counting arithmetic")
def _(m=qpm):
    eta_s, eta_i, mean = m.klyshko(1000.0, 1000.0, 675.0)
    assert abs(mean - 0.675) < 1e-12
    assert abs(m.collection_efficiency(0.675, 0.80, 0.079) - 0.9161) < 5e-4
    gamma, mu, tau = m.estimate_gamma(1e5, 1e5, 1e4, clock_hz=80.9e6, pump_power_mw=10.0)
    assert abs(gamma - 0.110499) < 1e-5
    assert abs(mu - 0.0123609) < 1e-6
    assert tau is not None


@check("visibility fit recovers an exact linear intercept")
def _(m=qpm):
    points = [(p, 0.98 - 0.001 * p, 0.005) for p in (1.0, 2.0, 3.0, 4.0, 5.0)]
    intercept, err, slope, _ = m.fit_visibility(points)
    assert abs(intercept - 0.98) < 1e-12
    assert abs(slope + 0.001) < 1e-12
    assert err > 0


@check("dispersive mapping pins 1 ps to 0.0028 nm")
def _(m=qpm):
    assert abs(m.time_to_wavelength(1.0) - 1549.8028) < 1e-6


@check("synthesize/reconstruct round trip")
def _(m=qpm):
    sim = m.simulate(m.design_apodized(), grid_points=128)
    stream = m.synthesize(sim, n_events=100_000, seed=11)
    assert stream.total_events == 300_000
    sqrt_p, jsi_p, counts = m.reconstruct(stream)
    assert counts > 99_000
    assert abs(sqrt_p - sim.purity) < 0.03, (sqrt_p, sim.purity)
    with tempfile.TemporaryDirectory() as d:
        path = str(Path(d) / "tags.csv")
        stream.save_csv(path)
        back = m.TimeTagStream.load_csv(path)
        assert back.total_events == stream.total_events


def main():
    failures = 0
    for name, fn in CHECKS:
        try:
            fn()
            print(f"PASS {name}")
        except AssertionError as e:
            failures += 1
            print(f"FAIL {name}: {e}")
        except Exception as e:  # noqa: BLE001
            failures += 1
            print(f"FAIL {name}: {type(e).__name__}: {e}")
    if failures:
        sys.exit(f"{failures} smoke check(s) failed")
    print(f"all {len(CHECKS)} smoke checks passed")


if __name__ == "__main__":
    main()
