#include "bilearn/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bilearn/errors.hpp"

namespace bilearn::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open for reading: " + path.string());
  return in;
}

std::vector<double> parse_row(const std::string& line) {
  std::vector<double> row;
  std::istringstream ss(line);
  double v;
  while (ss >> v) row.push_back(v);
  return row;
}

bool skippable(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

const char* bool_str(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

Eigen::MatrixXd load_matrix(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (skippable(line)) continue;
    rows.push_back(parse_row(line));
    if (rows.back().empty()) throw DataError("matrix file: unparsable line in " + path.string());
    if (rows.back().size() != rows.front().size()) {
      throw DataError("matrix file: ragged rows in " + path.string());
    }
  }
  if (rows.empty()) throw DataError("matrix file: no rows in " + path.string());
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out = open_out(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << (j ? " " : "") << format_double(m(i, j));
    }
    out << "\n";
  }
}

Dataset load_pairs(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<double>> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (skippable(line)) continue;
    lines.push_back(parse_row(line));
    if (lines.back().empty()) throw DataError("pairs file: unparsable line in " + path.string());
  }
  if (lines.empty() || lines.size() % 2 != 0) {
    throw DataError("pairs file: expected an even number of vector lines in " + path.string());
  }
  std::vector<TrainingPair> pairs;
  for (std::size_t k = 0; k < lines.size(); k += 2) {
    TrainingPair p;
    p.ground_truth = Eigen::Map<const Eigen::VectorXd>(lines[k].data(), lines[k].size());
    p.measurement = Eigen::Map<const Eigen::VectorXd>(lines[k + 1].data(), lines[k + 1].size());
    pairs.push_back(std::move(p));
  }
  return Dataset(std::move(pairs));
}

void save_pairs(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out = open_out(path);
  out << "# alternating lines: ground truth, measurement\n";
  for (const TrainingPair& p : data.pairs) {
    for (Eigen::Index i = 0; i < p.ground_truth.size(); ++i) {
      out << (i ? " " : "") << format_double(p.ground_truth[i]);
    }
    out << "\n";
    for (Eigen::Index i = 0; i < p.measurement.size(); ++i) {
      out << (i ? " " : "") << format_double(p.measurement[i]);
    }
    out << "\n";
  }
}

Eigen::VectorXd load_vector(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<double> vals;
  std::string line;
  while (std::getline(in, line)) {
    if (skippable(line)) continue;
    for (double v : parse_row(line)) vals.push_back(v);
  }
  if (vals.empty()) throw DataError("vector file: no values in " + path.string());
  return Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size());
}

void save_vector(const std::filesystem::path& path, const Eigen::VectorXd& v) {
  std::ofstream out = open_out(path);
  for (Eigen::Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << "\n";
}

void write_cost_curve_csv(const std::filesystem::path& path,
                          const std::vector<std::pair<double, double>>& curve) {
  std::ofstream out = open_out(path);
  out << "alpha,cost\n";
  for (const auto& [alpha, cost] : curve) {
    out << format_double(alpha) << "," << format_double(cost) << "\n";
  }
}

void write_solution_record(const std::filesystem::path& path, const BilevelSolution& solution) {
  std::ofstream out = open_out(path);
  out << "alpha_hat = " << format_double(solution.alpha_hat) << "\n";
  out << "cost = " << format_double(solution.cost_at_alpha_hat) << "\n";
  out << "is_positive = " << bool_str(solution.is_positive) << "\n";
  out << "at_infinity_proxy = " << bool_str(solution.at_infinity_proxy) << "\n";
}

void write_region_scan_csv(const std::filesystem::path& path, const RegionScanResult& result) {
  std::ofstream out = open_out(path);
  out << "x1,x2,old_ok,new_ok,pred_ok,alpha_hat,cost_at_alpha_hat,cost_at_zero,valid\n";
  auto opt_bool = [&](const std::optional<bool>& b) {
    return b.has_value() ? std::string(bool_str(*b)) : std::string("n/a");
  };
  for (const RegionCell& c : result.cells) {
    out << format_double(c.x1) << "," << format_double(c.x2) << "," << opt_bool(c.old_ok) << ","
        << bool_str(c.new_ok) << "," << opt_bool(c.pred_ok) << "," << format_double(c.alpha_hat)
        << "," << format_double(c.cost_at_alpha_hat) << "," << format_double(c.cost_at_zero) << ","
        << bool_str(c.valid) << "\n";
  }
}

void write_ratio_table_csv(const std::filesystem::path& path,
                           const std::vector<AreaRatioRow>& rows) {
  std::ofstream out = open_out(path);
  out << "problem,regularizer,condition,ratio,truncated\n";
  char buf[32];
  for (const AreaRatioRow& r : rows) {
    std::string ratio = "n/a";
    if (r.ratio.has_value()) {
      std::snprintf(buf, sizeof(buf), "%.3f", *r.ratio);
      ratio = buf;
    }
    out << r.problem << "," << r.regularizer << "," << r.condition << "," << ratio << ","
        << bool_str(r.truncated) << "\n";
  }
}

void write_pgm(const std::filesystem::path& path, const Eigen::VectorXd& image,
               Eigen::Index side) {
  if (image.size() != side * side) throw DataError("pgm write: image size mismatch");
  std::ofstream out = open_out(path);
  out << "P2\n" << side << " " << side << "\n65535\n";
  for (Eigen::Index r = 0; r < side; ++r) {
    for (Eigen::Index c = 0; c < side; ++c) {
      const double v = std::clamp(image[c * side + r], 0.0, 1.0);
      out << (c ? " " : "") << static_cast<int>(std::lround(v * 65535.0));
    }
    out << "\n";
  }
}

Eigen::VectorXd read_pgm(const std::filesystem::path& path, Eigen::Index* side_out) {
  std::ifstream in = open_in(path);
  std::string magic;
  in >> magic;
  if (magic != "P2") throw DataError("pgm read: expected plain P2 format");
  Eigen::Index w = 0, h = 0;
  long maxval = 0;
  in >> w >> h >> maxval;
  if (w != h || w < 1 || maxval < 1) throw DataError("pgm read: unsupported geometry");
  Eigen::VectorXd img(w * h);
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < w; ++c) {
      long v;
      if (!(in >> v)) throw DataError("pgm read: truncated pixel data");
      img[c * h + r] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  }
  if (side_out) *side_out = w;
  return img;
}

}  // namespace bilearn::io
