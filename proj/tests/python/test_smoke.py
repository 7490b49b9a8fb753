import numpy as np
import pytest

import kconn


def test_eigh_reconstructs():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    h = a + a.conj().T
    values, vectors = kconn.hermitian_eigh(h)
    assert np.all(np.diff(values) >= 0)
    assert np.linalg.norm(vectors @ np.diag(values) @ vectors.conj().T - h) < 1e-12


def test_kernel_values():
    assert kconn.kernel_eval("bergman-disk:nu=2", 0.5)[0, 0] == pytest.approx(16 / 9)
    assert kconn.kernel_eval("bergman-halfplane:nu=1", 1j)[0, 0] == pytest.approx(0.25)
    assert kconn.kernel_eval("fock:dim=3", [1, 0, 0])[0, 0] == pytest.approx(np.e)
    g = kconn.gram_matrix("bergman-disk:nu=2", [0, 0.5, -0.5])
    assert np.linalg.eigvalsh(g).min() > 0


def test_domain_and_spec_errors():
    with pytest.raises(ValueError):
        kconn.kernel_eval("bergman-disk:nu=2", 1.5)
    with pytest.raises(ValueError):
        kconn.kernel_eval("bogus:x=1", 0)


def test_disk_connection_form_sign():
    alpha = kconn.connection_form("bergman-disk:nu=2", 0.5, 1)
    assert alpha[0, 0] == pytest.approx(4 / 3)


def test_fock_covariant_derivative_backends_agree():
    out = kconn.covariant_derivative("fock:dim=2", lambda z: [z[0]], [1, 0], [1, 0])
    for key in ("closed", "direct", "sampled"):
        assert out[key][0] == pytest.approx(2.0, abs=1e-6)


def test_transport_and_universality():
    v = kconn.parallel_transport("bergman-disk:nu=1", 0, 0.5, 1, steps=128)
    assert abs(v[0] - np.sqrt(0.75)) < 1e-8
    assert kconn.universality_residual("fock:dim=2", [[0, 0], [0.3, 1j], [-0.2, 0.5]]) < 1e-9


def test_stinespring():
    choi = kconn.random_unital_cp_choi(3, 2, 3, 5)
    out = kconn.stinespring_dilate(choi, 3)
    assert out["rank"] == 3
    assert out["isometry_residual"] < 1e-12
    assert out["dilation_residual"] < 1e-10


def test_verify_reports():
    report = kconn.verify("grassmann", 42)
    assert report["passed"]
    assert kconn.grassmann_agreement(probes=5)["passed"]
