#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "alin/errors.hpp"
#include "alin/sparse.hpp"

namespace alin::synth {

struct SynthSpec {
    std::size_t n = 100;
    std::size_t p = 100;
    /// Noise standard deviation (variance 0.01).
    double sd = 0.1;
    std::uint64_t seed = 1;
};

struct SynthData {
    SparseMatrix x;
    Vector y;
    Vector beta_true;
};

/// β_true: 1 on [⌊0.1p⌋, ⌊0.2p⌋), 2 on [⌊0.2p⌋, ⌊0.4p⌋), 0 elsewhere (0-based).
inline Vector reference_coefficients(std::size_t p) {
    Vector b(p, 0.0);
    const std::size_t a = p / 10, c = 2 * p / 10, e = 4 * p / 10;
    for (std::size_t j = a; j < c; ++j) b[j] = 1.0;
    for (std::size_t j = c; j < e; ++j) b[j] = 2.0;
    return b;
}

/// X with i.i.d. N(0,1) entries (row by row), y = Xβ_true + N(0, sd²). Pure function of the spec.
inline SynthData synth_generate(const SynthSpec& spec) {
    alin::detail::require(spec.n >= 1 && spec.p >= 1, "synth_generate: n and p must be at least 1");
    alin::detail::require(spec.sd >= 0.0, "synth_generate: sd must be nonnegative");

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector dense(spec.n * spec.p);
    for (double& v : dense) v = normal(rng);

    SynthData out;
    out.x = SparseMatrix::from_dense(spec.n, spec.p, dense);
    out.beta_true = reference_coefficients(spec.p);
    out.y = matvec(out.x, out.beta_true);
    if (spec.sd > 0.0)
        for (double& v : out.y) v += spec.sd * normal(rng);
    return out;
}

}  // namespace alin::synth
