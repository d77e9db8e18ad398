#ifndef MIXPROD_SAMPLER_HPP
#define MIXPROD_SAMPLER_HPP

#include <cstdint>

#include "mixprod/common.hpp"
#include "mixprod/errors.hpp"
#include "mixprod/model.hpp"
#include "mixprod/rng.hpp"

namespace mixprod {

struct SampleBatch {
    int n = 0;
    std::int64_t N = 0;
    std::uint64_t seed = 0;
    SampleMatrix data;  // N x n, entries 0/1
};

// Draws N iid samples: per sample, a hidden state from pi, then independent
// Bernoulli observables from the state's column of m. Sample s uses the
// dedicated substream (seed, s), so output is byte-identical for any worker
// count or scheduling.
inline SampleBatch draw_samples(const MixtureModel& model, std::int64_t N,
                                std::uint64_t seed) {
    model.validate();
    if (N < 0) throw PreconditionFailed("draw_samples: N must be >= 0");
    SampleBatch batch;
    batch.n = model.n;
    batch.N = N;
    batch.seed = seed;
    batch.data.resize(N, model.n);
    const int k = model.k;
    const int n = model.n;
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t s = lo; s < hi; ++s) {
            Rng rng = Rng::substream(seed, s);
            double u = rng.uniform01();
            int j = 0;
            double acc = model.pi[0];
            while (j + 1 < k && u >= acc) acc += model.pi[++j];
            for (int i = 0; i < n; ++i)
                batch.data(static_cast<long>(s), i) =
                    rng.uniform01() < model.m(i, j) ? std::uint8_t{1} : std::uint8_t{0};
        }
    });
    return batch;
}

}  // namespace mixprod

#endif
