#pragma once

#include <optional>
#include <string>
#include <vector>

#include "distseq/types.hpp"

namespace distseq {

/// Per-column z-score parameters (sample sd, n - 1 denominator).
struct Standardization {
  Vector x_mean;
  Vector x_sd;
  double y_mean = 0.0;
  double y_sd = 1.0;
};

struct Dataset {
  std::string response;
  std::vector<std::string> covariates;  // column names of X, "(intercept)" first if added
  Matrix X;
  Vector y;
  std::optional<Standardization> scaling;
  bool intercept = false;
  std::size_t dropped_rows = 0;

  Index p() const { return X.cols(); }
  std::size_t n() const { return static_cast<std::size_t>(X.rows()); }
};

class DatasetError : public std::runtime_error {
 public:
  explicit DatasetError(const std::string& what) : std::runtime_error("dataset: " + what) {}
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Header row, comma separated, optional double-quoted fields with "" escapes.
CsvTable parse_csv(std::istream& in);

/// Rows with a missing or non-numeric value in any selected column are
/// dropped. With `standardize`, covariates and response are z-scored; the
/// intercept column (if requested) is added afterwards and left unscaled.
Dataset load_csv(const std::string& path, const std::string& response,
                 const std::vector<std::string>& covariates, bool standardize, bool intercept = false);
Dataset make_dataset(const CsvTable& table, const std::string& response,
                     const std::vector<std::string>& covariates, bool standardize, bool intercept);

/// A linear predictor on the raw scale: yhat = intercept + x_raw^T slopes.
struct RawCoefficients {
  double intercept = 0.0;
  Vector slopes;
};

/// Maps coefficients fitted on `data` back to the raw covariate/response scale.
RawCoefficients raw_coefficients(const Dataset& data, const Vector& beta);

}  // namespace distseq
