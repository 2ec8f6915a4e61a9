#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bilearn/bilevel.hpp"
#include "bilearn/experiments.hpp"

namespace bilearn::io {

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

/// Whitespace-separated numeric matrix, one row per line.
Eigen::MatrixXd load_matrix(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);

/// Training pairs as alternating lines: ground truth, then measurement.
/// Blank lines and lines starting with '#' are skipped.
Dataset load_pairs(const std::filesystem::path& path);
void save_pairs(const std::filesystem::path& path, const Dataset& data);

Eigen::VectorXd load_vector(const std::filesystem::path& path);
void save_vector(const std::filesystem::path& path, const Eigen::VectorXd& v);

/// Cost curve CSV with header `alpha,cost`.
void write_cost_curve_csv(const std::filesystem::path& path,
                          const std::vector<std::pair<double, double>>& curve);

/// Key-value record for a bilevel solution: alpha_hat, cost, is_positive,
/// at_infinity_proxy.
void write_solution_record(const std::filesystem::path& path, const BilevelSolution& solution);

/// Per-cell scan CSV with header
/// `x1,x2,old_ok,new_ok,pred_ok,alpha_hat,cost_at_alpha_hat,cost_at_zero,valid`.
void write_region_scan_csv(const std::filesystem::path& path, const RegionScanResult& result);

/// Ratio table CSV with header `problem,regularizer,condition,ratio,truncated`.
void write_ratio_table_csv(const std::filesystem::path& path,
                           const std::vector<AreaRatioRow>& rows);

/// 16-bit plain-text PGM (P2). Values are clipped to [0, 1] and scaled to
/// 65535. The flattened image is column-major side x side.
void write_pgm(const std::filesystem::path& path, const Eigen::VectorXd& image,
               Eigen::Index side);
Eigen::VectorXd read_pgm(const std::filesystem::path& path, Eigen::Index* side_out = nullptr);

}  // namespace bilearn::io
