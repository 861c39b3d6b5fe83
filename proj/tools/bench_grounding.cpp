// Compares the serial reference scan against the OpenMP kernel on a
// synthetic catalog, checking agreement while timing both.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "divrec/grounding.hpp"
#include "divrec/rng.hpp"
#include "divrec/synthetic.hpp"

using namespace divrec;

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

} // namespace

int main(int argc, char** argv) {
    size_t n_genres = 20;
    size_t items_per_genre = 550; // ~11k items, movie-catalog scale
    size_t n_queries = 1000;
    if (argc > 1) n_queries = std::stoul(argv[1]);
    if (argc > 2) items_per_genre = std::stoul(argv[2]);

    auto catalog = synthetic_catalog(n_genres, items_per_genre, 7);
    TrigramEmbedder embedder(512);

    double t0 = now_ms();
    auto index = build_index(catalog, embedder);
    double t_build = now_ms() - t0;

    // queries: perturbed titles, so nothing grounds trivially at distance 0
    Rng rng(99);
    std::vector<std::vector<float>> queries;
    queries.reserve(n_queries);
    for (size_t i = 0; i < n_queries; ++i) {
        std::string title = catalog.items()[rng.bounded(catalog.size())].title;
        title[rng.bounded(title.size())] = 'x';
        queries.push_back(embedder.embed(title));
    }

    t0 = now_ms();
    std::vector<Neighbor> serial;
    serial.reserve(n_queries);
    for (const auto& q : queries) serial.push_back(nearest_serial(index, q));
    double t_serial = now_ms() - t0;

    t0 = now_ms();
    std::vector<Neighbor> parallel;
    parallel.reserve(n_queries);
    for (const auto& q : queries) parallel.push_back(nearest(index, q));
    double t_parallel = now_ms() - t0;

    size_t mismatches = 0;
    for (size_t i = 0; i < n_queries; ++i) {
        if (serial[i].index != parallel[i].index || serial[i].distance != parallel[i].distance) {
            ++mismatches;
        }
    }

    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    printf("catalog items      : %zu (dim %d)\n", index.size(), index.dimension);
    printf("index build        : %8.1f ms\n", t_build);
    printf("queries            : %zu\n", n_queries);
    printf("serial scan        : %8.1f ms  (%.1f us/query)\n", t_serial,
           1000.0 * t_serial / static_cast<double>(n_queries));
    printf("openmp scan (%2d thr): %8.1f ms  (%.1f us/query)\n", threads, t_parallel,
           1000.0 * t_parallel / static_cast<double>(n_queries));
    printf("speedup            : %8.2fx\n", t_serial / t_parallel);
    printf("mismatches         : %zu\n", mismatches);
    return mismatches == 0 ? 0 : 1;
}
