import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from scesame.affinity import AffinityMatrix, knn_affinity
from scesame.errors import InvalidAffinityError, ParameterError
from scesame.spectral import (NORMALIZED, UNNORMALIZED, build_laplacian,
                              kmeans, spectral_cluster, spectral_embedding)


def _random_affinity(rng, n):
    a = rng.uniform(0.0, 1.0, (n, n))
    w = (a + a.T) / 2
    np.fill_diagonal(w, 0.0)
    return AffinityMatrix(n=n, w=w)


def _block_affinity(rng, sizes):
    n = int(sum(sizes))
    w = np.zeros((n, n))
    truth = np.zeros(n, dtype=int)
    pos = 0
    for b, size in enumerate(sizes):
        block = rng.uniform(0.1, 1.0, (size, size))
        block = (block + block.T) / 2
        np.fill_diagonal(block, 0.0)
        w[pos:pos + size, pos:pos + size] = block
        truth[pos:pos + size] = b
        pos += size
    perm = rng.permutation(n)
    return AffinityMatrix(n=n, w=w[np.ix_(perm, perm)]), truth[perm]


class TestLaplacian:
    def test_two_vertex_path(self):
        aff = AffinityMatrix(n=2, w=np.array([[0.0, 1.0], [1.0, 0.0]]))
        lap = build_laplacian(aff, UNNORMALIZED)
        assert np.array_equal(lap.matrix, [[1.0, -1.0], [-1.0, 1.0]])
        lap = build_laplacian(aff, NORMALIZED)
        assert np.allclose(lap.matrix, [[1.0, -1.0], [-1.0, 1.0]], atol=1e-15)

    def test_zero_affinity_degenerates_cleanly(self):
        aff = AffinityMatrix(n=3, w=np.zeros((3, 3)))
        assert np.array_equal(build_laplacian(aff, UNNORMALIZED).matrix, np.zeros((3, 3)))
        assert np.array_equal(build_laplacian(aff, NORMALIZED).matrix, np.eye(3))

    def test_quadratic_form_identity(self):
        # f' L f must equal (1/2) sum w_ij (f_i - f_j)^2
        rng = np.random.default_rng(0)
        aff = _random_affinity(rng, 6)
        lap = build_laplacian(aff, UNNORMALIZED)
        for _ in range(100):
            f = rng.normal(size=6)
            got = f @ lap.matrix @ f
            want = 0.5 * sum(aff.w[i, j] * (f[i] - f[j]) ** 2
                             for i in range(6) for j in range(6))
            assert abs(got - want) <= 1e-10 * max(1.0, abs(want))

    def test_constant_vector_in_kernel(self):
        rng = np.random.default_rng(1)
        for n in (2, 5, 20, 50):
            lap = build_laplacian(_random_affinity(rng, n), UNNORMALIZED)
            assert np.abs(lap.matrix @ np.ones(n)).max() <= 1e-10

    def test_positive_semidefinite_both_variants(self):
        rng = np.random.default_rng(2)
        for variant in (UNNORMALIZED, NORMALIZED):
            for _ in range(20):
                lap = build_laplacian(_random_affinity(rng, int(rng.integers(2, 30))),
                                      variant)
                eigenvalues = np.linalg.eigvalsh(lap.matrix)
                assert eigenvalues.min() >= -1e-8
                assert eigenvalues.min() <= 1e-8  # 0 is always in the spectrum

    def test_normalized_unit_diagonal(self):
        rng = np.random.default_rng(3)
        aff = _random_affinity(rng, 8)
        lap = build_laplacian(aff, NORMALIZED)
        assert np.allclose(np.diag(lap.matrix), 1.0, atol=1e-12)

    def test_rejects_bad_input(self):
        # sneak an asymmetric matrix past the dataclass validator
        aff = AffinityMatrix.__new__(AffinityMatrix)
        object.__setattr__(aff, "n", 2)
        object.__setattr__(aff, "w", np.array([[0.0, 1.0], [2.0, 0.0]]))
        with pytest.raises(InvalidAffinityError):
            build_laplacian(aff)
        with pytest.raises(ParameterError):
            build_laplacian(_random_affinity(np.random.default_rng(0), 3), "fancy")


class TestEmbedding:
    def test_three_components_zero_eigenvalue_multiplicity(self):
        rng = np.random.default_rng(4)
        aff, truth = _block_affinity(rng, [4, 5, 6])
        lap = build_laplacian(aff, UNNORMALIZED)
        emb = spectral_embedding(lap, 3)
        assert np.all(np.abs(emb.eigenvalues) <= 1e-10)
        # rows within one component coincide (0-eigenspace is spanned by
        # component indicators, whatever basis the solver returned)
        for comp in range(3):
            rows = emb.vectors[truth == comp]
            assert np.abs(rows - rows[0]).max() <= 1e-8
        full = np.linalg.eigvalsh(lap.matrix)
        assert full[3] > 1e-6  # exactly multiplicity 3

    def test_complete_graph_spectrum(self):
        n = 7
        w = 1.0 - np.eye(n)
        lap = build_laplacian(AffinityMatrix(n=n, w=w), UNNORMALIZED)
        emb = spectral_embedding(lap, n)
        want = np.concatenate([[0.0], np.full(n - 1, float(n))])
        assert np.allclose(emb.eigenvalues, want, atol=1e-10)

    def test_single_vertex(self):
        lap = build_laplacian(AffinityMatrix(n=1, w=np.zeros((1, 1))), UNNORMALIZED)
        emb = spectral_embedding(lap, 1)
        assert emb.eigenvalues[0] == pytest.approx(0.0, abs=1e-15)
        assert abs(emb.vectors[0, 0]) == pytest.approx(1.0)

    def test_invariants(self):
        rng = np.random.default_rng(5)
        aff = _random_affinity(rng, 12)
        lap = build_laplacian(aff, NORMALIZED)
        emb = spectral_embedding(lap, 5)
        assert np.all(np.diff(emb.eigenvalues) >= 0)
        assert np.all(emb.eigenvalues >= -1e-8)
        assert np.allclose(emb.vectors.T @ emb.vectors, np.eye(5), atol=1e-10)
        for j in range(5):
            u = emb.vectors[:, j]
            res = np.linalg.norm(lap.matrix @ u - emb.eigenvalues[j] * u)
            assert res <= 1e-10 * max(1.0, np.linalg.norm(u))

    def test_k_out_of_range(self):
        lap = build_laplacian(_random_affinity(np.random.default_rng(6), 4), NORMALIZED)
        with pytest.raises(ParameterError):
            spectral_embedding(lap, 5)


class TestKmeans:
    def test_single_cluster_centroid_is_mean(self):
        rng = np.random.default_rng(7)
        pts = rng.normal(size=(20, 3))
        out = kmeans(pts, 1, seed=0)
        assert np.all(out.labels == 0)
        assert out.clusters == (tuple(range(20)),)

    def test_two_separated_groups(self):
        pts = np.array([[0.0, 0.0], [0.1, 0.0], [10.0, 10.0], [10.1, 10.0]])
        out = kmeans(pts, 2, seed=0)
        assert out.labels[0] == out.labels[1]
        assert out.labels[2] == out.labels[3]
        assert out.labels[0] != out.labels[2]

    def test_beats_random_assignments(self):
        rng = np.random.default_rng(8)
        pts = rng.normal(size=(30, 2))
        out = kmeans(pts, 3, seed=0)

        def wcss(labels):
            total = 0.0
            for c in range(3):
                members = pts[labels == c]
                if len(members):
                    total += ((members - members.mean(axis=0)) ** 2).sum()
            return total

        ours = wcss(out.labels)
        for _ in range(1000):
            assert ours <= wcss(rng.integers(0, 3, 30)) + 1e-9

    def test_deterministic_and_seed_sensitive(self):
        rng = np.random.default_rng(9)
        pts = rng.normal(size=(40, 4))
        a = kmeans(pts, 4, seed=123)
        b = kmeans(pts, 4, seed=123)
        assert np.array_equal(a.labels, b.labels)

    def test_no_empty_clusters(self):
        # duplicated points force empty-cluster repair
        pts = np.array([[0.0, 0.0]] * 6 + [[5.0, 5.0]] * 2)
        out = kmeans(pts, 4, seed=0)
        assert all(len(c) >= 1 for c in out.clusters)
        assert np.bincount(out.labels, minlength=4).min() >= 1

    def test_k_equals_n(self):
        rng = np.random.default_rng(10)
        pts = rng.normal(size=(9, 2))
        out = kmeans(pts, 9, seed=0)
        assert sorted(len(c) for c in out.clusters) == [1] * 9

    def test_bad_k(self):
        with pytest.raises(ParameterError):
            kmeans(np.zeros((3, 2)), 4, seed=0)


class TestSpectralCluster:
    def test_block_diagonal_two_blocks(self):
        rng = np.random.default_rng(11)
        aff, truth = _block_affinity(rng, [5, 7])
        for variant in (UNNORMALIZED, NORMALIZED):
            labels = spectral_cluster(aff, 2, variant=variant, seed=0).labels
            assert adjusted_rand_score(truth, labels) == 1.0

    def test_exact_component_recovery_random_blocks(self):
        rng = np.random.default_rng(12)
        for _ in range(25):
            sizes = rng.integers(2, 10, int(rng.integers(2, 6)))
            aff, truth = _block_affinity(rng, sizes)
            labels = spectral_cluster(aff, len(sizes), seed=0).labels
            assert adjusted_rand_score(truth, labels) == 1.0

    def test_k_equals_n_gives_singletons(self):
        rng = np.random.default_rng(13)
        aff = _random_affinity(rng, 8)
        out = spectral_cluster(aff, 8, seed=0)
        assert sorted(len(c) for c in out.clusters) == [1] * 8

    def test_circles_demo(self):
        from scesame.fixtures import gen_circles

        data = gen_circles(seed=0, noise_sigma=0.02)
        aff = knn_affinity(data.points, 10)
        labels = spectral_cluster(aff, 3, variant=NORMALIZED, seed=0).labels
        assert adjusted_rand_score(data.labels, labels) >= 0.95
        plain = kmeans(data.points, 3, seed=0).labels
        assert adjusted_rand_score(data.labels, plain) <= 0.5

    def test_determinism_bitwise(self):
        rng = np.random.default_rng(14)
        aff = _random_affinity(rng, 20)
        a = spectral_cluster(aff, 4, seed=7).labels
        b = spectral_cluster(aff, 4, seed=7).labels
        assert np.array_equal(a, b)

    def test_too_small(self):
        aff = AffinityMatrix(n=1, w=np.zeros((1, 1)))
        with pytest.raises(ParameterError):
            spectral_cluster(aff, 1, seed=0)


def test_row_normalization_flag_also_separates_circles():
    from scesame.fixtures import gen_circles

    data = gen_circles(seed=1, noise_sigma=0.02)
    aff = knn_affinity(data.points, 10)
    plain = spectral_cluster(aff, 3, variant=NORMALIZED, seed=1).labels
    unit_rows = spectral_cluster(aff, 3, variant=NORMALIZED, seed=1,
                                 normalize_rows=True).labels
    assert adjusted_rand_score(data.labels, plain) == 1.0
    assert adjusted_rand_score(data.labels, unit_rows) == 1.0
