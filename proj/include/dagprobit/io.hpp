#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dagprobit/causal.hpp"
#include "dagprobit/dag.hpp"
#include "dagprobit/mcmc.hpp"
#include "dagprobit/simulate.hpp"

namespace dagprobit::io {

namespace fs = std::filesystem;

std::string fmt(double v);  // shortest round-trip decimal

// plain numeric CSV, no header
Eigen::MatrixXd read_matrix_csv(const fs::path& path);
void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& m);

// dataset CSV: header row, first column `y` (0/1), then X_2..X_q
Dataset read_dataset_csv(const fs::path& path);
void write_dataset_csv(const fs::path& path, const Dataset& data);

// edge-list text: one `u v` pair per line, 1-based
Dag read_dag_edgelist(const fs::path& path, int q);
void write_dag_edgelist(const fs::path& path, const Dag& dag);

// adjacency 0/1 CSV used for fixture interchange
Dag read_dag_adjacency_csv(const fs::path& path);
void write_dag_adjacency_csv(const fs::path& path, const Dag& dag);

// single human-editable key = value file ('#' comments); later keys win
std::map<std::string, std::string> read_config_file(const fs::path& path);

struct RunMeta {
    long iterations = 0, burn_in = 0, thin = 1;
    std::uint64_t seed = 0;
    double a = 0, g = 0, pi = 0, sigma0_sq = 0;
    bool standardize = false;
    int q = 0;
    long n = 0;
};

// run directory: theta0_trace.csv, dag_samples.jsonl, chol_samples.jsonl,
// accept_rates.json, config_echo.json, edge_probs.csv, data_used.csv
void save_run_dir(const fs::path& dir, const ChainOutput& chain, const Dataset& data,
                  const RunMeta& meta);
ChainOutput load_run_chain(const fs::path& dir);
Dataset load_run_data(const fs::path& dir);
RunMeta load_run_meta(const fs::path& dir);

void write_effects_csv(const fs::path& path,
                       const std::vector<CausalEffectTable>& tables);
void write_roc_csv(const fs::path& path, const std::vector<RocPoint>& roc);

// replicate-averaged ROC: per-threshold mean of (1-SPE, SEN) plus the
// 5th-95th percentile band across replicates
void write_roc_band_csv(const fs::path& path,
                        const std::vector<std::vector<RocPoint>>& roc_per_rep);

// fixture directory: truth_dag.csv, data.csv, true_effects.csv
void save_fixture_dir(const fs::path& dir, const Dataset& data,
                      const GroundTruth& truth);
Eigen::MatrixXd read_true_effects_csv(const fs::path& path, int q, long n);

}  // namespace dagprobit::io
