#include "distseq/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

namespace distseq {

namespace {

std::vector<std::string> split_record(std::istream& in, bool& ok) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field += c;
    }
  }
  ok = any;
  if (any) {
    fields.push_back(std::move(field));
  }
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) {
    return {};
  }
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::optional<double> parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) {
    return std::nullopt;
  }
  const char* first = s.data() + (s.front() == '+' ? 1 : 0);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::size_t column_index(const CsvTable& table, const std::string& name) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == name) {
      return i;
    }
  }
  throw DatasetError("missing column '" + name + "'");
}

double sample_sd(const Eigen::Ref<const Vector>& v, double mean) {
  const double n = static_cast<double>(v.size());
  return std::sqrt((v.array() - mean).square().sum() / (n - 1.0));
}

}  // namespace

CsvTable parse_csv(std::istream& in) {
  CsvTable table;
  bool ok = false;
  table.header = split_record(in, ok);
  if (!ok) {
    throw DatasetError("empty file");
  }
  for (auto& h : table.header) {
    h = trim(h);
  }
  while (true) {
    auto rec = split_record(in, ok);
    if (!ok) {
      break;
    }
    if (rec.size() == 1 && trim(rec.front()).empty()) {
      continue;  // blank line
    }
    table.rows.push_back(std::move(rec));
  }
  return table;
}

Dataset make_dataset(const CsvTable& table, const std::string& response,
                     const std::vector<std::string>& covariates, bool standardize, bool intercept) {
  if (covariates.empty()) {
    throw DatasetError("no covariates selected");
  }
  const std::size_t y_col = column_index(table, response);
  std::vector<std::size_t> x_cols;
  for (const auto& name : covariates) {
    x_cols.push_back(column_index(table, name));
  }

  std::vector<double> ys;
  std::vector<std::vector<double>> xs;
  std::size_t dropped = 0;
  for (const auto& rec : table.rows) {
    auto field = [&](std::size_t col) {
      return col < rec.size() ? parse_number(rec[col]) : std::nullopt;
    };
    const auto y = field(y_col);
    std::vector<double> x;
    bool good = y.has_value();
    for (std::size_t c = 0; good && c < x_cols.size(); ++c) {
      const auto v = field(x_cols[c]);
      good = v.has_value();
      if (good) {
        x.push_back(*v);
      }
    }
    if (!good) {
      ++dropped;
      continue;
    }
    ys.push_back(*y);
    xs.push_back(std::move(x));
  }
  if (ys.empty()) {
    throw DatasetError("no rows left after dropping missing or non-numeric values");
  }

  const auto n = static_cast<Index>(ys.size());
  const auto k = static_cast<Index>(covariates.size());
  Matrix raw(n, k);
  Vector y = Eigen::Map<const Vector>(ys.data(), n);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < k; ++c) {
      raw(i, c) = xs[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
    }
  }

  Dataset data;
  data.response = response;
  data.intercept = intercept;
  data.dropped_rows = dropped;
  if (standardize) {
    if (n < 2) {
      throw DatasetError("standardization needs at least two rows");
    }
    Standardization s;
    s.x_mean = raw.colwise().mean().transpose();
    s.x_sd.resize(k);
    for (Index c = 0; c < k; ++c) {
      s.x_sd(c) = sample_sd(raw.col(c), s.x_mean(c));
      if (!(s.x_sd(c) > 0.0)) {
        throw DatasetError("column '" + covariates[static_cast<std::size_t>(c)] +
                           "' is constant and cannot be standardized");
      }
      raw.col(c) = (raw.col(c).array() - s.x_mean(c)) / s.x_sd(c);
    }
    s.y_mean = y.mean();
    s.y_sd = sample_sd(y, s.y_mean);
    if (!(s.y_sd > 0.0)) {
      throw DatasetError("response '" + response + "' is constant and cannot be standardized");
    }
    y = (y.array() - s.y_mean) / s.y_sd;
    data.scaling = std::move(s);
  }

  if (intercept) {
    data.X.resize(n, k + 1);
    data.X.col(0).setOnes();
    data.X.rightCols(k) = raw;
    data.covariates.push_back("(intercept)");
  } else {
    data.X = std::move(raw);
  }
  data.covariates.insert(data.covariates.end(), covariates.begin(), covariates.end());
  data.y = std::move(y);
  return data;
}

Dataset load_csv(const std::string& path, const std::string& response,
                 const std::vector<std::string>& covariates, bool standardize, bool intercept) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DatasetError("cannot open '" + path + "'");
  }
  return make_dataset(parse_csv(in), response, covariates, standardize, intercept);
}

RawCoefficients raw_coefficients(const Dataset& data, const Vector& beta) {
  if (beta.size() != data.p()) {
    throw std::invalid_argument("raw_coefficients: dimension mismatch");
  }
  RawCoefficients out;
  const Index off = data.intercept ? 1 : 0;
  out.intercept = data.intercept ? beta(0) : 0.0;
  out.slopes = beta.tail(data.p() - off);
  if (data.scaling) {
    const auto& s = *data.scaling;
    // y = my + sy * (b0 + sum b_k (x_k - m_k) / s_k)
    out.slopes = s.y_sd * out.slopes.cwiseQuotient(s.x_sd);
    out.intercept = s.y_mean + s.y_sd * out.intercept - out.slopes.dot(s.x_mean);
  }
  return out;
}

}  // namespace distseq
