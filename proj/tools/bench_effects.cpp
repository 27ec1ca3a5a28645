// Benchmark: serial reference vs OpenMP BMA-effect kernel on a synthetic
// chain, plus a replicate-scenario comparison. Prints a small timing table.

#include <cstdio>
#include <omp.h>
#include <string>

#include "dagprobit/causal.hpp"
#include "dagprobit/mcmc.hpp"
#include "dagprobit/prior.hpp"
#include "dagprobit/rng.hpp"
#include "dagprobit/simulate.hpp"

using namespace dagprobit;

int main(int argc, char** argv) {
    int q = 15;
    long n = 300, iterations = 4000;
    if (argc > 1) q = std::stoi(argv[1]);
    if (argc > 2) n = std::stol(argv[2]);
    if (argc > 3) iterations = std::stol(argv[3]);

    SimConfig sim;
    sim.q = q;
    sim.n = n;
    sim.seed = 20240915;
    Rng rng(sim.seed);
    const Dag dag = random_dag(q, sim.resolved_edge_prob(), rng);
    auto [data, truth] = generate_dataset(dag, sim, rng);

    Hyperparameters hp;
    ChainConfig cfg;
    cfg.iterations = iterations;
    cfg.seed = 7;

    double t0 = omp_get_wtime();
    const ChainOutput chain = run_chain(data, hp.resolved(q, n), cfg);
    double t_fit = omp_get_wtime() - t0;
    std::printf("fit         q=%d n=%ld T=%ld          %8.3f s (%ld samples)\n", q, n,
                iterations, t_fit, chain.num_samples());

    const Eigen::VectorXd grid = data.xobs.col(0);
    std::vector<CausalEffectTable> serial, parallel;
    t0 = omp_get_wtime();
    for (Vertex s = 1; s < q; ++s) serial.push_back(bma_effects_serial(chain, s, grid));
    double t_serial = omp_get_wtime() - t0;

    t0 = omp_get_wtime();
    for (Vertex s = 1; s < q; ++s) parallel.push_back(bma_effects(chain, s, grid));
    double t_parallel = omp_get_wtime() - t0;

    bool identical = true;
    for (size_t i = 0; i < serial.size(); ++i)
        identical = identical && serial[i].bma == parallel[i].bma &&
                    serial[i].lo == parallel[i].lo && serial[i].hi == parallel[i].hi;
    std::printf("bma serial  (%d nodes x %ld samples)   %8.3f s\n", q - 1,
                chain.num_samples(), t_serial);
    std::printf("bma openmp  (%d threads)              %8.3f s   speedup %.2fx   %s\n",
                omp_get_max_threads(), t_parallel, t_serial / t_parallel,
                identical ? "bit-identical" : "MISMATCH");

    SimConfig small = sim;
    small.q = 8;
    small.n = 150;
    small.reps = 4;
    t0 = omp_get_wtime();
    auto serial_reps = run_scenario(small, hp, 1500, 1);
    double t_reps1 = omp_get_wtime() - t0;
    t0 = omp_get_wtime();
    auto parallel_reps = run_scenario(small, hp, 1500, omp_get_max_threads());
    double t_repsN = omp_get_wtime() - t0;
    bool reps_same = true;
    for (size_t r = 0; r < serial_reps.size(); ++r)
        reps_same = reps_same && serial_reps[r].auc == parallel_reps[r].auc &&
                    serial_reps[r].p_star == parallel_reps[r].p_star;
    std::printf("scenario    serial %.3f s, parallel %.3f s, speedup %.2fx   %s\n",
                t_reps1, t_repsN, t_reps1 / t_repsN,
                reps_same ? "identical results" : "MISMATCH");
    return identical && reps_same ? 0 : 1;
}
