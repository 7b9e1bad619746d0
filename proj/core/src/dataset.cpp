#include "rfsgd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rfsgd/csv.hpp"
#include "rfsgd/rng.hpp"

namespace rfsgd {

namespace {

constexpr std::uint64_t kTagG = 1;
constexpr std::uint64_t kTagX = 2;
constexpr std::uint64_t kTagNoise = 3;
constexpr std::uint64_t kTagSplit = 4;

double parse_real(const std::string& cell, std::size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0') {
    throw std::runtime_error("line " + std::to_string(line_no) +
                             ": cannot parse '" + cell + "' as a real");
  }
  return v;
}

void map_binary_labels(Eigen::VectorXd& y, const std::string& origin) {
  std::vector<std::string> bad;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) {
      y[i] = -1.0;
    } else if (y[i] != 1.0 && y[i] != -1.0) {
      bad.push_back(format_double(y[i]));
    }
  }
  if (!bad.empty()) {
    std::string msg = origin + ": non-binary labels in classification mode:";
    for (const auto& b : bad) msg += " " + b;
    throw std::runtime_error(msg);
  }
}

}  // namespace

CsvTable read_csv_table(const std::string& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (first && has_header) {
      table.header = std::move(cells);
    } else {
      table.rows.push_back(std::move(cells));
    }
    first = false;
  }
  return table;
}

Eigen::VectorXd synthetic_eigenvalues(Eigen::Index D, double alpha) {
  Eigen::VectorXd mu(D);
  for (Eigen::Index i = 0; i < D; ++i) {
    mu[i] = std::pow(static_cast<double>(i + 1), -1.0 / alpha);
  }
  return mu;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.D < 2) {
    throw std::invalid_argument(
        "generate_synthetic: D must be >= 2 (a single-eigenvalue spectrum "
        "cannot express a decay exponent)");
  }
  if (spec.n < 2) throw std::invalid_argument("generate_synthetic: n must be >= 2");
  if (!(spec.alpha > 0.0 && spec.alpha <= 1.0)) {
    throw std::invalid_argument("generate_synthetic: alpha must be in (0, 1]");
  }
  if (spec.r < 0.5) throw std::invalid_argument("generate_synthetic: r must be >= 1/2");
  if (spec.noise_sd < 0.0) {
    throw std::invalid_argument("generate_synthetic: noise_sd must be >= 0");
  }

  const Eigen::Index n = spec.n, D = spec.D;
  const Eigen::VectorXd mu = synthetic_eigenvalues(D, spec.alpha);
  const Eigen::VectorXd sd = mu.cwiseSqrt();

  Rng g_rng(derive_seed(spec.seed, kTagG));
  Eigen::VectorXd g(D);
  for (Eigen::Index j = 0; j < D; ++j) g[j] = g_rng.normal();
  g /= g.norm();

  // f_H = L^r g for the linear kernel: coefficients mu_i^{r-1/2} g_i.
  Eigen::VectorXd coef(D);
  for (Eigen::Index j = 0; j < D; ++j) coef[j] = std::pow(mu[j], spec.r - 0.5) * g[j];

  Rng x_rng(derive_seed(spec.seed, kTagX));
  Eigen::MatrixXd X(n, D);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < D; ++j) X(i, j) = sd[j] * x_rng.normal();
  }

  Eigen::VectorXd f = X * coef;
  Eigen::VectorXd y = f;
  if (spec.noise_sd > 0.0) {
    Rng e_rng(derive_seed(spec.seed, kTagNoise));
    for (Eigen::Index i = 0; i < n; ++i) y[i] += spec.noise_sd * e_rng.normal();
  }

  Dataset out;
  out.X = std::move(X);
  out.y = std::move(y);
  out.truth = std::move(f);
  out.meta.n = n;
  out.meta.D = D;
  out.meta.task = Task::regression;
  out.meta.source = "synthetic";
  return out;
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  const CsvTable table = read_csv_table(path, schema.has_header);
  if (table.rows.empty()) throw std::runtime_error(path + ": no data rows");
  const std::size_t cols = table.rows.front().size();
  if (cols < 2) throw std::runtime_error(path + ": need at least 2 columns");
  if (schema.target_column < 0 ||
      static_cast<std::size_t>(schema.target_column) >= cols) {
    throw std::runtime_error(path + ": target_column " +
                             std::to_string(schema.target_column) +
                             " out of range for " + std::to_string(cols) +
                             " columns");
  }

  const Eigen::Index n = static_cast<Eigen::Index>(table.rows.size());
  const Eigen::Index D = static_cast<Eigen::Index>(cols - 1);
  Dataset out;
  out.X.resize(n, D);
  out.y.resize(n);

  const std::size_t header_lines = schema.has_header ? 1 : 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& cells = table.rows[static_cast<std::size_t>(i)];
    const std::size_t line_no = static_cast<std::size_t>(i) + 1 + header_lines;
    if (cells.size() != cols) {
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": expected " + std::to_string(cols) +
                               " fields, found " + std::to_string(cells.size()));
    }
    Eigen::Index d = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = parse_real(cells[c], line_no);
      if (static_cast<int>(c) == schema.target_column) {
        out.y[i] = v;
      } else {
        out.X(i, d++) = v;
      }
    }
  }

  if (schema.task == Task::binary_classification) map_binary_labels(out.y, path);
  out.meta.n = n;
  out.meta.D = D;
  out.meta.task = schema.task;
  out.meta.source = path;
  return out;
}

Dataset load_libsvm(const std::string& path, Task task) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);

  std::vector<double> labels;
  std::vector<std::vector<std::pair<Eigen::Index, double>>> rows;
  Eigen::Index max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;
    labels.push_back(parse_real(tok, line_no));
    std::vector<std::pair<Eigen::Index, double>> entries;
    while (ss >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) {
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": expected index:value, found '" + tok + "'");
      }
      const double idx_real = parse_real(tok.substr(0, colon), line_no);
      const auto idx = static_cast<Eigen::Index>(idx_real);
      if (idx < 1 || static_cast<double>(idx) != idx_real) {
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": feature index must be a positive integer");
      }
      entries.emplace_back(idx, parse_real(tok.substr(colon + 1), line_no));
      max_index = std::max(max_index, idx);
    }
    rows.push_back(std::move(entries));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");

  Dataset out;
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  out.X = Eigen::MatrixXd::Zero(n, max_index);
  out.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.y[i] = labels[static_cast<std::size_t>(i)];
    for (const auto& [idx, val] : rows[static_cast<std::size_t>(i)]) {
      out.X(i, idx - 1) = val;
    }
  }
  if (task == Task::binary_classification) map_binary_labels(out.y, path);
  out.meta.n = n;
  out.meta.D = max_index;
  out.meta.task = task;
  out.meta.source = path;
  return out;
}

Dataset take_rows(const Dataset& data, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count < 0 || begin + count > data.meta.n) {
    throw std::invalid_argument("take_rows: slice [" + std::to_string(begin) +
                                ", " + std::to_string(begin + count) +
                                ") out of range for n=" +
                                std::to_string(data.meta.n));
  }
  Dataset part;
  part.X = data.X.middleRows(begin, count);
  part.y = data.y.segment(begin, count);
  if (data.truth) part.truth = data.truth->segment(begin, count);
  part.meta = data.meta;
  part.meta.n = count;
  return part;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction,
                                  std::uint64_t seed, bool standardize) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("split: test_fraction must be in (0, 1)");
  }
  const Eigen::Index n = data.meta.n;
  const auto n_test = static_cast<Eigen::Index>(
      std::floor(static_cast<double>(n) * test_fraction));
  const Eigen::Index n_train = n - n_test;
  if (n_test < 1 || n_train < 1) {
    throw std::invalid_argument("split: degenerate part sizes (" +
                                std::to_string(n_train) + ", " +
                                std::to_string(n_test) + ")");
  }

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  Rng rng(derive_seed(seed, kTagSplit));
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(
        rng.uniform_index(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }

  auto take = [&](Eigen::Index offset, Eigen::Index count) {
    Dataset part;
    part.X.resize(count, data.meta.D);
    part.y.resize(count);
    if (data.truth) part.truth.emplace(count);
    for (Eigen::Index i = 0; i < count; ++i) {
      const Eigen::Index src = perm[static_cast<std::size_t>(offset + i)];
      part.X.row(i) = data.X.row(src);
      part.y[i] = data.y[src];
      if (data.truth) (*part.truth)[i] = (*data.truth)[src];
    }
    part.meta = data.meta;
    part.meta.n = count;
    return part;
  };

  Dataset train = take(0, n_train);
  Dataset test = take(n_train, n_test);

  if (standardize) standardize_train_test(train, test);

  return {std::move(train), std::move(test)};
}

void standardize_train_test(Dataset& train, Dataset& test) {
  if (train.meta.D != test.meta.D) {
    throw std::invalid_argument("standardize_train_test: dimension mismatch");
  }
  const Eigen::Index D = train.meta.D;
  const Eigen::Index n_train = train.meta.n;
  const Eigen::VectorXd mean = train.X.colwise().mean();
  Eigen::VectorXd sd(D);
  for (Eigen::Index j = 0; j < D; ++j) {
    const double var = (train.X.col(j).array() - mean[j]).square().sum() /
                       static_cast<double>(n_train > 1 ? n_train - 1 : 1);
    sd[j] = std::sqrt(var);
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < D; ++j) {
    if (sd[j] > 1e-12) keep.push_back(j);
  }
  auto apply = [&](Dataset& part) {
    Eigen::MatrixXd Z(part.meta.n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
      const Eigen::Index j = keep[k];
      Z.col(static_cast<Eigen::Index>(k)) =
          (part.X.col(j).array() - mean[j]) / sd[j];
    }
    part.X = std::move(Z);
    part.meta.D = static_cast<Eigen::Index>(keep.size());
    part.meta.standardized = true;
    for (Eigen::Index j = 0; j < D; ++j) {
      if (std::find(keep.begin(), keep.end(), j) == keep.end()) {
        part.meta.dropped_columns.push_back(j);
      }
    }
  };
  apply(train);
  apply(test);
}

}  // namespace rfsgd
