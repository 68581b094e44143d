"""Pair probabilities, reduced densities, fidelities, sweeps."""

import cmath
import math

import numpy as np
import pytest

from icnl.analysis import (
    CallableTemplate,
    conditional_density,
    fidelity,
    occupancy_probability,
    pair_probability_coefficient,
    sweep,
    trace_paths,
)
from icnl.errors import EmptyKappaSectorError, PathError, UnknownParameterError
from icnl.experiments import build_bell, build_frustrated, build_object_id
from icnl.gates import simulate
from icnl.perturb import AMP_ONE, PerturbAmp, make_state, vacuum_state


def test_pair_coefficient_examples():
    for phi in (0.0, 0.4, math.pi / 2, math.pi, 5.0):
        final = simulate(build_frustrated(phi))
        expected = abs(1 + cmath.exp(-1j * phi)) ** 2
        assert abs(pair_probability_coefficient(final) - expected) < 1e-12
    assert pair_probability_coefficient(vacuum_state(("s", "i"))) == 0.0
    assert abs(pair_probability_coefficient(simulate(build_bell())) - 2.0) < 1e-15


def test_conditional_density_bell():
    rho = conditional_density(simulate(build_bell()), ("s2", "i2"))
    assert rho.basis == ("HH", "VV")
    assert np.max(np.abs(rho.matrix - 0.5 * np.ones((2, 2)))) < 1e-15
    assert abs(fidelity(rho, [2**-0.5, 2**-0.5]) - 1.0) < 1e-12


def test_conditional_density_object_matches_closed_form():
    for t in (0.0, 0.3, 0.7, 1.0):
        for gamma in (0.0, math.pi / 4, math.pi / 2, math.pi):
            rho = conditional_density(simulate(build_object_id(t, gamma)), ("s1", "s2"))
            assert rho.basis == ("0H", "H0")
            coh = t * cmath.exp(1j * gamma)
            expected = np.array([[0.5, coh.conjugate() / 2], [coh / 2, 0.5]])
            assert np.max(np.abs(rho.matrix - expected)) < 1e-12


def test_conditional_density_is_physical():
    for circuit in (build_bell(), build_object_id(0.41, 1.2), build_frustrated(0.3)):
        final = simulate(circuit)
        rho = conditional_density(final, final.paths[:2])
        assert abs(np.trace(rho.matrix) - 1) < 1e-12
        assert np.max(np.abs(rho.matrix - rho.matrix.conj().T)) < 1e-12
        assert np.min(np.linalg.eigvalsh(rho.matrix)) > -1e-10


def test_conditional_density_keep_all_paths_is_pure_projector():
    final = simulate(build_bell())
    rho = conditional_density(final, final.paths)
    evals = np.linalg.eigvalsh(rho.matrix)
    assert abs(evals[-1] - 1.0) < 1e-12


def test_conditional_density_errors():
    with pytest.raises(EmptyKappaSectorError):
        conditional_density(vacuum_state(("s", "i")), ("s",))
    final = simulate(build_bell())
    with pytest.raises(PathError):
        conditional_density(final, ("s2", "s2"))


def test_trace_composition_matches_one_shot(rng):
    # random pure two-pair-sector state over 4 paths
    paths = ("a", "b", "c", "d")
    terms = {}
    occs = ["HH00", "HV00", "0VH0", "00VH", "H0V0", "V00H"]
    for occ in occs:
        z = complex(rng.normal(), rng.normal())
        terms[occ] = PerturbAmp(c10=z)
    state = make_state(paths, {"0000": AMP_ONE, **terms})
    direct = conditional_density(state, ("a", "b"))
    staged = trace_paths(conditional_density(state, ("a", "b", "c")), ("a", "b"))
    assert direct.basis == staged.basis
    assert np.max(np.abs(direct.matrix - staged.matrix)) < 1e-12


def test_fidelity_basics():
    rho = conditional_density(simulate(build_bell()), ("s2", "i2"))
    assert abs(fidelity(rho, [1 / math.sqrt(2), 1 / math.sqrt(2)]) - 1) < 1e-12
    assert abs(fidelity(rho, [1 / math.sqrt(2), -1 / math.sqrt(2)])) < 1e-12
    with pytest.raises(ValueError):
        fidelity(rho, [1, 0, 0])


def test_occupancy_probability_object_detectors():
    for t in (0.0, 0.5, 1.0):
        for gamma in (0.0, 0.9, math.pi):
            final = simulate(build_object_id(t, gamma, with_bs=True))
            pa = occupancy_probability(final, "s1")
            pb = occupancy_probability(final, "s2")
            assert abs(pa - (1 + t * math.cos(gamma)) / 2) < 1e-12
            assert abs(pb - (1 - t * math.cos(gamma)) / 2) < 1e-12


def _frustrated_template():
    return CallableTemplate(
        ("PHI",), lambda overrides: simulate(build_frustrated(overrides["PHI"]))
    )


def test_sweep_grid_and_values():
    rows = sweep(_frustrated_template(), "PHI", [0.0, math.pi / 2, math.pi])
    assert [r.value for r in rows] == [0.0, math.pi / 2, math.pi]
    assert abs(rows[0].pair_coefficient - 4.0) < 1e-15
    assert abs(rows[1].pair_coefficient - 2.0) < 1e-15
    assert rows[2].pair_coefficient == 0.0


def test_sweep_single_point_equals_direct_run():
    rows = sweep(_frustrated_template(), "PHI", [0.77])
    direct = pair_probability_coefficient(simulate(build_frustrated(0.77)))
    assert rows[0].pair_coefficient == direct


def test_sweep_unknown_parameter():
    with pytest.raises(UnknownParameterError):
        sweep(_frustrated_template(), "THETA", [0.0])


def test_sweep_detector_columns():
    template = CallableTemplate(
        ("GAMMA",),
        lambda overrides: simulate(build_object_id(0.7, overrides["GAMMA"], with_bs=True)),
    )
    grid = [k * math.pi / 8 for k in range(9)]
    rows = sweep(template, "GAMMA", grid, detectors=("s1", "s2"))
    for row in rows:
        assert abs(row.detectors["s1"] - (1 + 0.7 * math.cos(row.value)) / 2) < 1e-12


def test_frustration_fringe_complementarity():
    # coefficient(phi) + coefficient(phi + pi) == 4
    template = _frustrated_template()
    for k in range(16):
        phi = k * 2 * math.pi / 16
        a = pair_probability_coefficient(simulate(build_frustrated(phi)))
        b = pair_probability_coefficient(simulate(build_frustrated(phi + math.pi)))
        assert abs(a + b - 4.0) < 1e-12
