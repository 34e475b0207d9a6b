#include "qsgp/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace qsgp {

namespace {

bool parse_double(const std::string& cell, double& out) {
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t' ||
                           *(last - 1) == '\r'))
    --last;
  if (first == last) return false;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, delim)) cells.push_back(cell);
  if (!line.empty() && line.back() == delim) cells.push_back("");
  return cells;
}

}  // namespace

Dataset standardize_dataset(MatrixXd X, VectorXd y, Likelihood likelihood) {
  require(X.rows() >= 1, "dataset: need at least one row");
  require(X.rows() == y.size(), "dataset: X/y size mismatch");
  require(X.allFinite() && y.allFinite(), "dataset: non-finite entries");

  Dataset data;
  data.y_raw = y;
  const Index n = X.rows();
  const Index d = X.cols();
  Standardizer st;
  st.x_mean = X.colwise().mean();
  st.x_scale = VectorXd(d);
  for (Index k = 0; k < d; ++k) {
    const double var =
        (X.col(k).array() - st.x_mean[k]).square().sum() /
        static_cast<double>(n);
    const double sd = std::sqrt(var);
    st.x_scale[k] = sd > 1e-12 ? sd : 1.0;  // zero-variance guard
  }
  for (Index k = 0; k < d; ++k)
    X.col(k) = (X.col(k).array() - st.x_mean[k]) / st.x_scale[k];

  if (likelihood == Likelihood::kLogistic) {
    for (Index i = 0; i < n; ++i) {
      if (y[i] == 0.0) y[i] = -1.0;
      require(y[i] == 1.0 || y[i] == -1.0,
              "dataset: logistic targets must be in {0,1} or {-1,+1}");
    }
    st.targets_standardized = false;
  } else {
    st.y_mean = y.mean();
    const double var =
        (y.array() - st.y_mean).square().sum() / static_cast<double>(n);
    const double sd = std::sqrt(var);
    st.y_scale = sd > 1e-12 ? sd : 1.0;
    y = (y.array() - st.y_mean) / st.y_scale;
    st.targets_standardized = true;
  }
  data.X = std::move(X);
  data.y = std::move(y);
  data.standardizer = st;
  return data;
}

Dataset parse_csv(const std::string& text, const CsvOptions& options,
                  Likelihood likelihood) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string line;
  Index line_no = 0;
  Index n_cols = -1;
  bool first_content_line = true;
  while (std::getline(ss, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line, options.delimiter);
    if (first_content_line) {
      first_content_line = false;
      bool numeric = true;
      double tmp;
      for (const auto& c : cells)
        if (!parse_double(c, tmp)) numeric = false;
      const bool skip = options.header == HeaderMode::kYes ||
                        (options.header == HeaderMode::kAuto && !numeric);
      if (options.header == HeaderMode::kNo && !numeric) {
        for (Index c = 0; c < static_cast<Index>(cells.size()); ++c)
          if (!parse_double(cells[static_cast<std::size_t>(c)], tmp))
            throw ParseError("non-numeric cell", line_no, c + 1);
      }
      if (skip) {
        n_cols = static_cast<Index>(cells.size());
        continue;
      }
    }
    if (n_cols < 0) n_cols = static_cast<Index>(cells.size());
    if (static_cast<Index>(cells.size()) != n_cols)
      throw ParseError("inconsistent column count", line_no, 0);
    std::vector<double> row(cells.size());
    for (Index c = 0; c < n_cols; ++c) {
      if (!parse_double(cells[static_cast<std::size_t>(c)],
                        row[static_cast<std::size_t>(c)]))
        throw ParseError("non-numeric cell", line_no, c + 1);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("csv: no data rows");
  require(n_cols >= 2, "csv: need at least one feature and one target column");

  const Index target =
      options.target_column < 0 ? n_cols - 1 : options.target_column;
  require(target >= 0 && target < n_cols, "csv: target column out of range");

  const auto n = static_cast<Index>(rows.size());
  MatrixXd X(n, n_cols - 1);
  VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    Index out_c = 0;
    for (Index c = 0; c < n_cols; ++c) {
      const double v = rows[static_cast<std::size_t>(i)]
                           [static_cast<std::size_t>(c)];
      if (c == target)
        y[i] = v;
      else
        X(i, out_c++) = v;
    }
  }
  return standardize_dataset(std::move(X), std::move(y), likelihood);
}

Dataset load_csv(const std::string& path, const CsvOptions& options,
                 Likelihood likelihood) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), options, likelihood);
}

Dataset make_sinc_dataset(Index n, double noise_sd, std::uint64_t seed) {
  require(n >= 1, "sinc dataset: n must be >= 1");
  CounterRng rng(rng_key(seed, kStreamData, 1));
  MatrixXd X(n, 1);
  VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    const double x = -5.0 + 10.0 * rng.next_unit();
    const double sinc = x == 0.0 ? 1.0 : std::sin(x) / x;
    X(i, 0) = x;
    y[i] = sinc + noise_sd * rng.next_normal();
  }
  return standardize_dataset(std::move(X), std::move(y),
                             Likelihood::kGaussian);
}

Dataset make_two_blob_dataset(Index n, double separation, std::uint64_t seed) {
  require(n >= 2, "blob dataset: n must be >= 2");
  CounterRng rng(rng_key(seed, kStreamData, 2));
  MatrixXd X(n, 2);
  VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    const double label = (i % 2 == 0) ? 1.0 : -1.0;
    X(i, 0) = label * separation / 2.0 + rng.next_normal();
    X(i, 1) = rng.next_normal();
    y[i] = label;
  }
  return standardize_dataset(std::move(X), std::move(y),
                             Likelihood::kLogistic);
}

void write_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write file: " + path);
  char buf[64];
  for (Index i = 0; i < data.n(); ++i) {
    for (Index k = 0; k < data.d(); ++k) {
      const double raw = data.X(i, k) * data.standardizer.x_scale[k] +
                         data.standardizer.x_mean[k];
      std::snprintf(buf, sizeof buf, "%.17g", raw);
      out << buf << ",";
    }
    std::snprintf(buf, sizeof buf, "%.17g", data.y_raw[i]);
    out << buf << "\n";
  }
}

}  // namespace qsgp
