import numpy as np
import pytest

from conewave.errors import GeometryError, ResourceLimitError, SubsonicError
from conewave.geometry import (InterfaceMotion, circle_mesh_2d, frame_at, icosphere_mesh,
                               load_off, physical_h, require_subsonic, subsonic_audit,
                               turbine_boundary_2d, turbine_smax, _turbine_radius)
from conewave.medium import SpeedField


def test_icosphere_counts():
    m0 = icosphere_mesh(0)
    assert (m0.n_vertices, m0.n_elements) == (12, 20)
    m2 = icosphere_mesh(2)
    assert (m2.n_vertices, m2.n_elements) == (162, 320)
    m3 = icosphere_mesh(3)
    assert (m3.n_vertices, m3.n_elements) == (642, 1280)


def test_icosphere_subdivision_recurrence():
    # V(level+1) = V + E, F(level+1) = 4F
    prev = icosphere_mesh(1)
    nxt = icosphere_mesh(2)
    assert nxt.n_elements == 4 * prev.n_elements
    assert nxt.n_vertices == prev.n_vertices + len(prev.edges)


def test_icosphere_level_limit():
    with pytest.raises(ResourceLimitError):
        icosphere_mesh(8)


def test_mesh_manifold_invariants():
    for level in (0, 1, 2, 3):
        m = icosphere_mesh(level)
        m.validate()
        v, e, f = m.n_vertices, len(m.edges), m.n_elements
        assert v - e + f == 2
        assert np.allclose(np.linalg.norm(m.vertices, axis=1), 1.0, atol=1e-12)


def test_icosphere_area_converges_to_sphere():
    areas = [icosphere_mesh(level).element_areas_spherical().sum() for level in range(4)]
    for a in areas:
        assert a == pytest.approx(4 * np.pi, rel=1e-12)


def test_triangle_orientation_outward():
    m = icosphere_mesh(2)
    v = m.vertices
    tri = m.elements
    n = np.cross(v[tri[:, 1]] - v[tri[:, 0]], v[tri[:, 2]] - v[tri[:, 0]])
    centroid = (v[tri[:, 0]] + v[tri[:, 1]] + v[tri[:, 2]]) / 3.0
    assert np.all(np.einsum("ij,ij->i", n, centroid) > 0)


def test_circle_mesh():
    m = circle_mesh_2d(4)
    assert np.allclose(m.angles, [0, np.pi / 2, np.pi, 3 * np.pi / 2])
    m = circle_mesh_2d(200)
    assert m.n_elements == 200
    assert m.h == pytest.approx(2 * np.pi / 200)
    # inscribed polygon perimeter approaches 2 pi at O(h^2): pi^3/(3 n^2)
    for n in (64, 128):
        mesh = circle_mesh_2d(n)
        seg = mesh.vertices[mesh.elements[:, 1]] - mesh.vertices[mesh.elements[:, 0]]
        perim = np.linalg.norm(seg, axis=1).sum()
        assert abs(perim - 2 * np.pi) < 11.0 / n**2


def test_frame_fixed_sphere_identity(icosphere3):
    motion = InterfaceMotion("fixed-sphere")
    fr = frame_at(motion, icosphere3, 0.7)
    assert np.allclose(fr.positions, icosphere3.vertices)
    assert np.allclose(fr.vertex_normals, icosphere3.vertices)
    assert np.allclose(fr.normal_velocity, 0.0)
    assert np.allclose(np.linalg.norm(fr.vertex_normals, axis=1), 1.0, atol=1e-10)
    assert np.all(fr.jacobians > 0)


def test_frame_expanding_circle():
    mesh = circle_mesh_2d(64)
    motion = InterfaceMotion("expanding-circle-2d", radius=1.0, rate=0.5)
    fr = frame_at(motion, mesh, 1.0)
    assert np.allclose(fr.normal_velocity, 0.5)
    assert np.allclose(np.linalg.norm(fr.positions, axis=1), 1.5)


def test_frame_rising_sphere_normal_velocity(icosphere3):
    # d/dt (center + R alpha) = U e3 so V_nu = U (nu . e3)
    rate = 7.69e-2
    motion = InterfaceMotion("rigid-translation", radius=1.55, center=(0, 0, 2.323),
                             velocity=(0, 0, rate))
    fr = frame_at(motion, icosphere3, 2.0)
    assert np.allclose(fr.normal_velocity, rate * fr.vertex_normals[:, 2], atol=1e-13)


def test_frame_time_consistency(icosphere3):
    motion = InterfaceMotion("rising-sphere", speed=0.5)
    delta = 1e-6
    f0 = frame_at(motion, icosphere3, 1.0)
    f1 = frame_at(motion, icosphere3, 1.0 + delta)
    fd = (f1.positions - f0.positions) / delta
    vel = motion.velocity(icosphere3.vertices, 1.0)
    assert np.abs(fd - vel).max() < 1e-6


def test_turbine_profile_values():
    assert _turbine_radius(np.pi / 6) == pytest.approx(1.0, abs=1e-12)
    expected = (1 + 0.3 * np.exp(-1.0)) / (1 + 0.3 * np.e**2)
    assert _turbine_radius(0.0) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.3452, abs=2e-4)


def test_turbine_static_when_zero_mach():
    alpha = np.linspace(0, 2 * np.pi, 13)
    p0, v0 = turbine_boundary_2d(alpha, 0.0, 0.0)
    p1, v1 = turbine_boundary_2d(alpha, 2.5, 0.0)
    assert np.allclose(p0, p1)
    assert np.allclose(v0, 0.0)


def test_turbine_periodicity_and_symmetry():
    motion = InterfaceMotion("rotating-turbine-2d", mach=0.5)
    alpha = np.linspace(0, 2 * np.pi, 40, endpoint=False)
    p = motion.position(alpha, 1.3)
    p_per = motion.position(alpha + 2 * np.pi, 1.3)
    assert np.allclose(p, p_per, atol=1e-12)
    # three-fold shape symmetry: rotating the parameter by 2pi/3 rotates the shape
    p_rot = motion.position(alpha + 2 * np.pi / 3.0, 1.3)
    th = 2 * np.pi / 3.0
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    assert np.allclose(p_rot, p @ rot.T, atol=1e-12)


def test_turbine_max_normal_mach_matches_target():
    motion = InterfaceMotion("rotating-turbine-2d", mach=0.5)
    alpha = np.linspace(0, 2 * np.pi, 4096, endpoint=False)
    mach = np.abs(motion.normal_velocity(alpha, 0.0))
    assert mach.max() == pytest.approx(0.5, rel=1e-4)


def test_subsonic_audit_cases(icosphere3):
    c1 = SpeedField("constant", value=1.0)
    mm, ok, _, _ = subsonic_audit(InterfaceMotion("rising-sphere", speed=0.5), icosphere3, c1,
                                  np.linspace(0, 2.5, 6))
    assert ok and mm == pytest.approx(0.5, rel=1e-9)
    mm, ok, vtx, tbad = subsonic_audit(InterfaceMotion("rising-sphere", speed=1.1), icosphere3, c1,
                                       [0.0, 1.0])
    assert not ok and mm == pytest.approx(1.1, rel=1e-9)
    with pytest.raises(SubsonicError):
        require_subsonic(InterfaceMotion("rising-sphere", speed=1.1), icosphere3, c1, [0.0])


def test_subsonic_audit_fireball(icosphere3):
    fld = SpeedField("atmosphere-fireball")
    motion = InterfaceMotion("rigid-translation", radius=1.55, center=(0, 0, 2.323),
                             velocity=(0, 0, 7.69e-2))
    mm, ok, _, _ = subsonic_audit(motion, icosphere3, fld, np.linspace(0, 110, 12))
    assert ok
    # local Mach uses the hot interface speed; the characteristic ambient
    # Mach number |v| / c_ambient(ground) is the paper's 0.08 figure.
    assert 0.03 < mm < 0.06
    c_ground = float(fld.speed(np.array([[8.0, 0.0, 0.0]]), 0.0)[0])
    assert 7.69e-2 / c_ground == pytest.approx(0.08, abs=0.005)


def test_off_loader_roundtrip(tmp_path, icosphere3):
    m = icosphere_mesh(1)
    path = tmp_path / "sphere.off"
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{m.n_vertices} {m.n_elements} 0\n")
        for v in m.vertices:
            fh.write(f"{v[0]} {v[1]} {v[2]}\n")
        for t in m.elements:
            fh.write(f"3 {t[0]} {t[1]} {t[2]}\n")
    loaded = load_off(path)
    assert loaded.n_vertices == m.n_vertices
    assert loaded.n_elements == m.n_elements
    loaded.validate()


def test_off_loader_rejects_garbage(tmp_path):
    path = tmp_path / "bad.off"
    path.write_text("NOT_OFF\n1 0 0\n0 0 1\n")
    with pytest.raises(GeometryError):
        load_off(path)


def test_physical_h_grows_with_expansion():
    mesh = circle_mesh_2d(32)
    motion = InterfaceMotion("expanding-circle-2d", radius=1.0, rate=0.5)
    assert physical_h(motion, mesh, 1.0) > physical_h(motion, mesh, 0.0)


def test_smax_value_stable():
    # dense sampling of the tangential-speed functional
    assert turbine_smax() == pytest.approx(0.7946633, rel=1e-5)
