import math

import numpy as np
import pytest

from delone6.delone import estimate_params, min_pairwise_distance, verify_delone
from delone6.generators import (GeneratorSpec, SpecError, cut_project_icosahedral, generate,
                                icosahedral_projections)


def spec(kind, extent, **params):
    return GeneratorSpec(kind, extent, {k: str(v) for k, v in params.items()})


def test_cubic_count_and_metadata():
    s = generate(spec("cubic", 20))
    assert len(s.pset) == 9261
    assert (s.r_analytic, s.R_analytic) == (0.5, math.sqrt(3) / 2)


@pytest.mark.parametrize("kind, r, R", [
    ("bcc", math.sqrt(3) / 4, math.sqrt(5) / 4),
    ("fcc", math.sqrt(2) / 4, 0.5),
    ("hexagonal", 0.5, math.sqrt(1 / 3 + 1 / 4)),
])
def test_lattice_metadata_matches_estimates(kind, r, R):
    s = generate(spec(kind, 6, margin=1.5))
    assert s.r_analytic == pytest.approx(r) and s.R_analytic == pytest.approx(R)
    assert min_pairwise_distance(s.pset.points) / 2 == pytest.approx(r, abs=1e-12)
    p = estimate_params(s.pset, 1e-4)
    assert p.R - 1e-12 <= R <= p.R_upper + 1e-12


def test_generation_is_deterministic():
    for kind, params in (("perturbed", {"seed": 9}), ("cut_project_icosahedral", {"shift": 0.1, "seed": 2})):
        a = generate(spec(kind, 8, **params)).pset.points
        b = generate(spec(kind, 8, **params)).pset.points
        assert np.array_equal(a, b)


def test_perturbed_bounds():
    base = generate(spec("cubic", 10, margin=2))
    delta = 0.1
    s = generate(spec("perturbed", 10, delta=delta, seed=1, margin=2))
    assert s.r_analytic is None
    p = estimate_params(s.pset, 1e-3)
    assert p.r >= base.r_analytic - 2 * delta
    assert p.R <= base.R_analytic + delta


def test_perturbation_limit():
    with pytest.raises(SpecError) as exc:
        generate(spec("perturbed", 6, delta=0.2))
    assert exc.value.key == "delta"


def test_icosahedral_projection_is_orthogonal():
    par, perp = icosahedral_projections()
    M = np.vstack([par, perp])
    assert np.allclose(M @ M.T, np.eye(6), atol=1e-14)
    # Physical images of the basis are equal-length five-fold directions.
    lengths = np.linalg.norm(par, axis=0)
    assert np.allclose(lengths, lengths[0])


def test_quasicrystal_is_delone_with_five_fold_points(quasicrystal, analyses):
    an = analyses["quasicrystal"]
    assert "5" in an.report.histogram
    assert not np.all(an.in_Y[an.pset.window_indices])
    ps = quasicrystal.pset
    p = verify_delone(ps, np.ones(len(ps), bool))
    assert math.isfinite(p.r) and math.isfinite(p.R) and p.r > 0.3
    assert min_pairwise_distance(ps.points) == pytest.approx(1.0, abs=1e-9)


def test_quasicrystal_tiny_window_is_rejected():
    # Only the origin survives: flagged as a sparse sample.
    assert len(cut_project_icosahedral((4, 4, 4), 1e-6)) == 1
    with pytest.raises(SpecError):
        generate(spec("cut_project_icosahedral", 4, window_radius=1e-6))
    with pytest.raises(SpecError):
        cut_project_icosahedral((4, 4, 4), 0.0)


def test_heptagonal_generator_confirms_seven_fold(heptagonal):
    info = heptagonal.info
    assert info["seven_fold_index"] in heptagonal.pset.window_indices
    assert info["trials"][-1]["n_max"] == 7


@pytest.mark.parametrize("text, key", [
    ("[generator]\nkind = cubic\nextent = 0\n", "extent"),
    ("[generator]\nkind = nonsense\n", "kind"),
    ("[generator]\nextent = 4\n", "kind"),
    ("[generator]\nkind = cubic\nextent = 1 2\n", "extent"),
    ("[params]\na = 1\n", "generator"),
])
def test_spec_file_errors_name_the_key(tmp_path, text, key):
    path = tmp_path / "spec.ini"
    path.write_text(text)
    with pytest.raises(SpecError) as exc:
        GeneratorSpec.from_file(path)
    assert exc.value.key == key


def test_bad_parameter_value(tmp_path):
    path = tmp_path / "spec.ini"
    path.write_text("[generator]\nkind = cubic\nextent = 4\n[params]\na = abc\n")
    with pytest.raises(SpecError) as exc:
        generate(GeneratorSpec.from_file(path))
    assert exc.value.key == "a"


def test_custom_file(tmp_path):
    from delone6.io import write_points

    pts = np.random.default_rng(0).uniform(0, 5, size=(40, 3))
    write_points(tmp_path / "p.csv", pts)
    s = generate(spec("custom_file", 5, path=tmp_path / "p.csv"))
    assert len(s.pset) == 40
