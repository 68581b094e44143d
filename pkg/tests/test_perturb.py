"""Truncated-series amplitudes and sparse qutrit states."""

import math

import numpy as np
import pytest

from icnl.errors import PathError
from icnl.gates import (
    align,
    apply,
    bs,
    hwp,
    nl,
    object_channel,
    phase,
    simulate,
    Circuit,
)
from icnl.perturb import (
    AMP_ONE,
    KAPPA,
    KAPPA_BAR,
    KetState,
    PerturbAmp,
    amp_mul,
    make_state,
    phase_factor,
    vacuum_state,
)


def random_int_amp(rng) -> PerturbAmp:
    # Gaussian-integer coefficients keep every ring operation exact in
    # doubles, so the axioms can be checked with plain equality.
    re = rng.integers(-9, 10, size=3)
    im = rng.integers(-9, 10, size=3)
    return PerturbAmp(*(complex(int(a), int(b)) for a, b in zip(re, im)))


def test_amp_mul_examples():
    assert amp_mul(AMP_ONE, KAPPA) == KAPPA
    assert amp_mul(KAPPA, KAPPA_BAR) == PerturbAmp()
    a = PerturbAmp(1, -1j, 0)
    assert amp_mul(a, a) == PerturbAmp(1, -2j, 0)


def test_amp_mul_truncates_second_order():
    assert amp_mul(KAPPA, KAPPA) == PerturbAmp()
    assert amp_mul(KAPPA_BAR, KAPPA_BAR) == PerturbAmp()


def test_ring_axioms_hold_exactly_on_random_triples(rng):
    for _ in range(10_000):
        a, b, c = (random_int_amp(rng) for _ in range(3))
        assert amp_mul(amp_mul(a, b), c) == amp_mul(a, amp_mul(b, c))
        assert amp_mul(a, b + c) == amp_mul(a, b) + amp_mul(a, c)
        assert (a + b) + c == a + (b + c)
        assert amp_mul(a, b) == amp_mul(b, a)
        assert a + b == b + a


def test_vacuum_state():
    st = vacuum_state(["s1", "i1"])
    assert st.terms == {"00": AMP_ONE}
    st4 = vacuum_state(["s1", "i1", "s2", "i2"])
    assert st4.terms == {"0000": AMP_ONE}


def test_vacuum_state_rejects_bad_registries():
    with pytest.raises(PathError):
        vacuum_state([])
    with pytest.raises(PathError):
        vacuum_state(["s", "s"])


def test_make_state_validates_occupations():
    with pytest.raises(PathError):
        make_state(["a", "b"], {"0": 1.0})
    with pytest.raises(PathError):
        make_state(["a", "b"], {"0X": 1.0})


def test_extract_order_kappa():
    st = make_state(["s", "i"], {"00": AMP_ONE, "HH": PerturbAmp(c10=-1j)})
    kappa = st.extract_order("kappa")
    assert kappa.terms == {"HH": AMP_ONE}
    assert vacuum_state(["s", "i"]).extract_order("kappa").terms == {}


def test_extract_order_on_final_interference_state():
    # |vac> - i*kappa*(1 + e^{-i*phi})|00HH> extracts the in-parentheses factor.
    phi = 0.7
    final = simulate(_frustrated(phi))
    kappa = final.extract_order("kappa")
    expected = 1 + np.exp(-1j * phi)
    assert abs(kappa.terms["00HH"].c00 - expected) < 1e-12


def _frustrated(phi):
    return Circuit(
        ("s1", "i1", "s2", "i2"),
        (nl("s1", "i1"), phase("i1", phi), align("s1", "s2"), align("i1", "i2"), nl("s2", "i2")),
    )


def test_phase_factor_exact_at_quarter_turns():
    assert phase_factor(0.0) == 1
    assert phase_factor(math.pi) == -1
    assert phase_factor(-math.pi) == -1
    assert phase_factor(math.pi / 2) == -1j
    assert phase_factor(-math.pi / 2) == 1j
    assert phase_factor(3 * math.pi / 2) == 1j
    assert abs(phase_factor(0.3) - np.exp(-0.3j)) < 1e-15


def _random_physical_circuit(rng, n_gates=6):
    paths = ("s1", "i1", "s2", "i2", "w")
    ops = []
    used_object = False
    for _ in range(n_gates):
        choice = rng.integers(0, 5)
        if choice == 0:
            ops.append(nl(*rng.choice([("s1", "i1"), ("s2", "i2")])))
        elif choice == 1:
            ops.append(phase(str(rng.choice(["s1", "i1", "s2", "i2"])), float(rng.uniform(0, 2 * math.pi))))
        elif choice == 2:
            ops.append(hwp(str(rng.choice(["s1", "i1", "s2", "i2"]))))
        elif choice == 3:
            a, b = rng.choice([("s1", "s2"), ("i1", "i2")])
            ops.append(align(a, b))
        elif not used_object:
            ops.append(object_channel("i1", "w", float(rng.uniform(0, 1)), float(rng.uniform(0, 2 * math.pi))))
            used_object = True
    return Circuit(paths, tuple(ops))


def test_vacuum_term_stays_exactly_one_after_every_gate(rng):
    # Coherent pumping from vacuum: zeroth order is the untouched vacuum.
    for _ in range(200):
        circuit = _random_physical_circuit(rng)
        state = vacuum_state(circuit.paths)
        for op in circuit.ops:
            state = apply(state, op)
            vac = state.vacuum_occ
            for occ, amp in state.terms.items():
                if occ == vac:
                    assert amp.c00 == 1
                else:
                    assert amp.c00 == 0


def test_one_pair_terms_have_exactly_two_photons(rng):
    for _ in range(200):
        circuit = _random_physical_circuit(rng)
        state = simulate(circuit)
        for occ, amp in state.terms.items():
            if amp.c10 != 0:
                assert sum(1 for ch in occ if ch != "0") == 2, occ


def test_kappa_amplitudes_divide_out_minus_i():
    st = make_state(["s", "i"], {"HH": PerturbAmp(c10=-1j)})
    assert st.kappa_amplitudes() == {"HH": 1 + 0j}
