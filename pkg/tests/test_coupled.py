import math

import numpy as np
import pytest

from risim.coupled import (Dipole, FarFieldChannel, ImpedanceNetwork,
                           build_impedance_network, end_to_end_channel,
                           far_field_channel, load_network, mutual_impedance,
                           optimize_tunable_loads, psi_matrices, save_network)
from risim.errors import SingularNetworkError, UnsupportedGeometryError
from risim.waves import WaveEnvironment

ENV = WaveEnvironment.from_frequency(3e9, c=3e8)
LAM = ENV.wavelength


def halfwave(x=0.0, y=0.0, z=0.0, radius_factor=1e-3):
    return Dipole(position=[x, y, z], length=LAM / 2, radius=LAM * radius_factor)


def emf_oracle(a, b, env):
    """Independent tanh-sinh quadrature of the induced-EMF coupling integral."""
    import mpmath
    mpmath.mp.dps = 30
    ha = mpmath.mpf(a.length) / 2
    hb = mpmath.mpf(b.length) / 2
    k = mpmath.mpf(env.wavenumber)
    sep = np.asarray(b.position) - np.asarray(a.position)
    d = mpmath.sqrt(mpmath.mpf(sep[0]) ** 2 + mpmath.mpf(sep[1]) ** 2)
    z_off = mpmath.mpf(sep[2])
    if d == 0 and abs(z_off) < ha + hb:
        d = mpmath.mpf(a.radius)
    cos_kha = mpmath.cos(k * ha)

    def integrand(z):
        r0 = mpmath.sqrt(d * d + (z + z_off) ** 2)
        r1 = mpmath.sqrt(d * d + (z + z_off - ha) ** 2)
        r2 = mpmath.sqrt(d * d + (z + z_off + ha) ** 2)
        kern = (mpmath.e ** (-1j * k * r1) / r1 + mpmath.e ** (-1j * k * r2) / r2
                - 2 * cos_kha * mpmath.e ** (-1j * k * r0) / r0)
        return kern * mpmath.sin(k * (hb - abs(z)))

    integral = mpmath.quad(integrand, [-hb, 0, hb])
    value = (1j * mpmath.mpf(env.eta0) / (4 * mpmath.pi
             * mpmath.sin(k * ha) * mpmath.sin(k * hb)) * integral)
    return complex(value)


def random_network(rng, m0=3, l0=3, p=5, scale=50.0):
    def block(rows, cols):
        return scale * (rng.normal(size=(rows, cols))
                        + 1j * rng.normal(size=(rows, cols)))
    z_ss = block(p, p) + 200.0 * np.eye(p)  # keep the core well conditioned
    return ImpedanceNetwork(
        z_tt=block(m0, m0), z_ts=block(m0, p), z_tr=block(m0, l0),
        z_st=block(p, m0), z_ss=z_ss, z_sr=block(p, l0),
        z_rt=block(l0, m0), z_rs=block(l0, p), z_rr=block(l0, l0),
        z_t=np.eye(m0) * 50.0, z_r=np.eye(l0) * 50.0,
        z_tun=np.eye(p) * (30.0 + 40.0j))


def mp_matrix(a):
    import mpmath
    return mpmath.matrix([[mpmath.mpc(v) for v in row] for row in np.atleast_2d(a)])


def mp_channel_oracle(net):
    """Extended-precision evaluation of the full channel algebra."""
    import mpmath
    mpmath.mp.dps = 50
    z = {name: mp_matrix(getattr(net, name))
         for name in net._BLOCKS + ("z_t", "z_r", "z_tun")}
    core = (z["z_ss"] + z["z_tun"]) ** -1
    psi_tt = z["z_tt"] - z["z_ts"] * core * z["z_st"]
    psi_tr = z["z_tr"] - z["z_ts"] * core * z["z_sr"]
    psi_rt = z["z_rt"] - z["z_rs"] * core * z["z_st"]
    psi_rr = z["z_rr"] - z["z_rs"] * core * z["z_sr"]
    l0 = net.n_rx
    eye = mpmath.eye(l0)
    zr_inv = z["z_r"] ** -1
    drive = (psi_tt + z["z_t"]) ** -1
    lhs = eye + psi_rr * zr_inv - psi_rt * drive * psi_tr * zr_inv
    h = lhs ** -1 * psi_rt * drive
    to_np = lambda m: np.array([[complex(m[i, j]) for j in range(m.cols)]
                                for i in range(m.rows)])
    return (to_np(psi_tt), to_np(psi_tr), to_np(psi_rt), to_np(psi_rr)), to_np(h)


# -- dipole validation -------------------------------------------------------------

def test_dipole_thin_wire_guard():
    with pytest.raises(ValueError):
        Dipole(position=[0, 0, 0], length=LAM / 2, radius=LAM / 2 / 10)


def test_non_z_orientation_rejected():
    with pytest.raises(UnsupportedGeometryError):
        Dipole(position=[0, 0, 0], length=LAM / 2, radius=LAM / 1000,
               orientation=[1.0, 0.0, 0.0])


# -- mutual impedance ----------------------------------------------------------------

def test_self_impedance_against_quadrature_oracle():
    pytest.importorskip("mpmath")
    dip = halfwave()
    z = mutual_impedance(dip, dip, ENV)
    oracle = emf_oracle(dip, dip, ENV)
    assert z == pytest.approx(oracle, rel=1e-9)
    # thin half-wave dipole: resistance close to the textbook 73 ohm
    assert 70.0 < z.real < 76.0
    assert 35.0 < z.imag < 50.0


def test_mutual_impedance_against_oracle_side_by_side():
    pytest.importorskip("mpmath")
    a = halfwave()
    b = halfwave(x=0.35 * LAM, z=0.2 * LAM)
    z = mutual_impedance(a, b, ENV)
    oracle = emf_oracle(a, b, ENV)
    assert z == pytest.approx(oracle, rel=1e-9)


def test_mutual_impedance_unequal_lengths_reciprocal():
    a = halfwave()
    b = Dipole(position=[0.4 * LAM, 0.0, 0.1 * LAM], length=0.4 * LAM,
               radius=LAM / 1000)
    z_ab = mutual_impedance(a, b, ENV)
    z_ba = mutual_impedance(b, a, ENV)
    assert z_ab == pytest.approx(z_ba, rel=1e-9)


def test_far_separation_coupling_vanishes():
    # induced-EMF coupling decays like 1/d: ~0.19 ohm at 100 lambda for a
    # half-wave pair, dropping below a milliohm only past ~2e4 lambda
    a = halfwave()
    near = abs(mutual_impedance(a, halfwave(x=100.0 * LAM), ENV))
    mid = abs(mutual_impedance(a, halfwave(x=800.0 * LAM), ENV))
    far = abs(mutual_impedance(a, halfwave(x=20_000.0 * LAM), ENV))
    assert near < 0.5
    assert mid < near / 7.0
    assert far < 1e-3


def test_network_builder_blocks_are_reciprocal():
    tx = [halfwave(y=-5 * LAM, z=0.0)]
    surf = [halfwave(x=i * 0.3 * LAM) for i in range(3)]
    rx = [halfwave(y=5 * LAM)]
    net = build_impedance_network(tx, surf, rx, ENV)
    assert np.allclose(net.z_ts, net.z_st.T, rtol=1e-9)
    assert np.allclose(net.z_rs, net.z_sr.T, rtol=1e-9)
    assert np.allclose(net.z_rt, net.z_tr.T, rtol=1e-9)
    assert np.allclose(net.z_ss, net.z_ss.T, rtol=1e-9)


# -- network algebra --------------------------------------------------------------------

def test_psi_reduces_to_blocks_when_decoupled():
    rng = np.random.default_rng(2)
    net = random_network(rng, m0=2, l0=2, p=3)
    decoupled = ImpedanceNetwork(
        z_tt=net.z_tt, z_ts=np.zeros((2, 3)), z_tr=net.z_tr,
        z_st=np.zeros((3, 2)), z_ss=net.z_ss, z_sr=np.zeros((3, 2)),
        z_rt=net.z_rt, z_rs=np.zeros((2, 3)), z_rr=net.z_rr,
        z_t=net.z_t, z_r=net.z_r, z_tun=net.z_tun)
    psi_tt, psi_tr, psi_rt, psi_rr = psi_matrices(decoupled)
    assert np.allclose(psi_tt, net.z_tt)
    assert np.allclose(psi_tr, net.z_tr)
    assert np.allclose(psi_rt, net.z_rt)
    assert np.allclose(psi_rr, net.z_rr)


def test_psi_scalar_closed_form():
    net = ImpedanceNetwork(
        z_tt=[[10.0 + 1j]], z_ts=[[2.0 - 1j]], z_tr=[[0.5j]],
        z_st=[[2.0 - 1j]], z_ss=[[30.0 + 5j]], z_sr=[[1.0 + 1j]],
        z_rt=[[0.5j]], z_rs=[[1.0 + 1j]], z_rr=[[12.0]],
        z_t=[[50.0]], z_r=[[50.0]], z_tun=[[20.0 - 3j]])
    psi_tt, psi_tr, psi_rt, psi_rr = psi_matrices(net)
    core = 1.0 / (net.z_ss[0, 0] + net.z_tun[0, 0])
    assert psi_tt[0, 0] == pytest.approx(net.z_tt[0, 0]
                                         - net.z_ts[0, 0] * core * net.z_st[0, 0])
    assert psi_rt[0, 0] == pytest.approx(net.z_rt[0, 0]
                                         - net.z_rs[0, 0] * core * net.z_st[0, 0])


def test_open_circuit_limit_restores_blocks():
    rng = np.random.default_rng(3)
    net = random_network(rng, m0=2, l0=2, p=4)
    opened = net.with_tuning(np.eye(4) * 1e9j)
    psi_tt, psi_tr, psi_rt, psi_rr = psi_matrices(opened)
    for psi, block in ((psi_tt, net.z_tt), (psi_tr, net.z_tr),
                       (psi_rt, net.z_rt), (psi_rr, net.z_rr)):
        assert np.max(np.abs(psi - block)) <= 1e-6 * np.max(np.abs(block))


def test_singular_core_raises_with_condition_number():
    net = ImpedanceNetwork(
        z_tt=[[10.0]], z_ts=[[1.0]], z_tr=[[1.0]],
        z_st=[[1.0]], z_ss=[[30.0]], z_sr=[[1.0]],
        z_rt=[[1.0]], z_rs=[[1.0]], z_rr=[[10.0]],
        z_t=[[50.0]], z_r=[[50.0]], z_tun=[[-30.0]])
    with pytest.raises(SingularNetworkError):
        psi_matrices(net)


def test_scalar_channel_closed_form():
    z_rt = 4.0 - 2.0j
    z_t = 50.0 + 0j
    z_r = 75.0 + 0j
    net = ImpedanceNetwork(
        z_tt=[[0.0]], z_ts=[[0.0]], z_tr=[[z_rt]],
        z_st=[[0.0]], z_ss=[[40.0]], z_sr=[[0.0]],
        z_rt=[[z_rt]], z_rs=[[0.0]], z_rr=[[0.0]],
        z_t=[[z_t]], z_r=[[z_r]], z_tun=[[10.0]])
    h = end_to_end_channel(net)
    expected = (z_rt / z_t) / (1.0 - z_rt ** 2 / (z_t * z_r))
    assert h[0, 0] == pytest.approx(expected, rel=1e-12)


def test_blocked_direct_link_leaves_surface_path():
    rng = np.random.default_rng(5)
    net = random_network(rng, m0=1, l0=1, p=3)
    blocked = ImpedanceNetwork(
        z_tt=net.z_tt, z_ts=net.z_ts, z_tr=np.zeros((1, 1)),
        z_st=net.z_st, z_ss=net.z_ss, z_sr=net.z_sr,
        z_rt=np.zeros((1, 1)), z_rs=net.z_rs, z_rr=net.z_rr,
        z_t=net.z_t, z_r=net.z_r, z_tun=net.z_tun)
    ff = far_field_channel(blocked)
    assert np.allclose(ff.direct, 0.0)
    assert np.allclose(ff.total, ff.reradiated)


def test_channel_algebra_matches_extended_precision_oracle():
    pytest.importorskip("mpmath")
    rng = np.random.default_rng(7)
    for _ in range(3):
        net = random_network(rng, m0=3, l0=3, p=5)
        (ott, otr, ort, orr), oh = mp_channel_oracle(net)
        psi_tt, psi_tr, psi_rt, psi_rr = psi_matrices(net)
        h = end_to_end_channel(net)
        for got, want in ((psi_tt, ott), (psi_tr, otr), (psi_rt, ort),
                          (psi_rr, orr), (h, oh)):
            scale = np.max(np.abs(want))
            assert np.max(np.abs(got - want)) <= 1e-9 * scale


def test_far_field_agrees_at_large_separation():
    # identical microstructure, distances scaled far into the far field
    tx = [halfwave(y=-400 * LAM, z=0.0), halfwave(y=-400 * LAM, x=0.3 * LAM)]
    surf = [halfwave(x=(i % 2) * 0.3 * LAM, y=(i // 2) * 0.3 * LAM, z=200 * LAM)
            for i in range(4)]
    rx = [halfwave(y=400 * LAM), halfwave(y=400 * LAM, x=0.3 * LAM)]
    net = build_impedance_network(tx, surf, rx, ENV, z_tuning=10.0 - 60.0j)
    exact = end_to_end_channel(net)
    approx = far_field_channel(net).total
    rel = np.linalg.norm(exact - approx) / np.linalg.norm(exact)
    assert rel < 0.01


def test_open_circuit_nulling_is_monotone():
    rng = np.random.default_rng(11)
    net = random_network(rng, m0=2, l0=2, p=4)
    direct_only = ImpedanceNetwork(
        z_tt=net.z_tt, z_ts=np.zeros((2, 4)), z_tr=net.z_tr,
        z_st=np.zeros((4, 2)), z_ss=net.z_ss, z_sr=np.zeros((4, 2)),
        z_rt=net.z_rt, z_rs=np.zeros((2, 4)), z_rr=net.z_rr,
        z_t=net.z_t, z_r=net.z_r, z_tun=net.z_tun)
    h_direct = end_to_end_channel(direct_only)
    gaps = []
    for magnitude in (1e5, 1e7, 1e9):
        h = end_to_end_channel(net.with_tuning(np.eye(4) * 1j * magnitude))
        gaps.append(np.linalg.norm(h - h_direct) / np.linalg.norm(h_direct))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-5


def test_far_field_reradiated_addend_vanishes_when_open():
    rng = np.random.default_rng(13)
    net = random_network(rng, m0=1, l0=1, p=3)
    ff = far_field_channel(net.with_tuning(np.eye(3) * 1e9j))
    assert (np.linalg.norm(ff.reradiated) / np.linalg.norm(ff.direct)) <= 1e-3


# -- tunable load optimization -----------------------------------------------------------

def test_single_candidate_is_identity():
    rng = np.random.default_rng(17)
    net = random_network(rng, m0=1, l0=1, p=3)
    loads, score = optimize_tunable_loads(net, [25.0 + 5.0j])
    assert np.allclose(np.diagonal(loads), 25.0 + 5.0j)
    h = end_to_end_channel(net.with_tuning(loads))
    assert score == pytest.approx(abs(h[0, 0]))


def test_load_optimization_matches_exhaustive_search():
    import itertools
    rng = np.random.default_rng(19)
    net = random_network(rng, m0=1, l0=1, p=4)
    candidates = [10.0 + 80.0j, 10.0 - 45.0j]
    _, score = optimize_tunable_loads(net, candidates)
    best = -1.0
    for combo in itertools.product(candidates, repeat=4):
        h = end_to_end_channel(net.with_tuning(np.diag(combo)))
        best = max(best, abs(h[0, 0]))
    assert score == pytest.approx(best, rel=1e-12)


def test_optimized_loads_keep_fixed_resistance():
    rng = np.random.default_rng(23)
    net = random_network(rng, m0=1, l0=1, p=4)
    r0 = 12.5
    candidates = [r0 + 1j * x for x in np.linspace(-200, 200, 9)]
    loads, _ = optimize_tunable_loads(net, candidates)
    assert np.allclose(np.diagonal(loads).real, r0)


def test_mimo_rejected():
    rng = np.random.default_rng(29)
    net = random_network(rng, m0=2, l0=2, p=3)
    with pytest.raises(ValueError):
        optimize_tunable_loads(net, [50.0])


# -- serialization ----------------------------------------------------------------------------

def test_network_round_trip(tmp_path):
    rng = np.random.default_rng(31)
    net = random_network(rng, m0=2, l0=1, p=3)
    path = tmp_path / "network.txt"
    save_network(path, net)
    back = load_network(path)
    for name in net._BLOCKS + ("z_t", "z_r", "z_tun"):
        assert np.array_equal(getattr(back, name), getattr(net, name)), name
