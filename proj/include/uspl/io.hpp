#pragma once

#include <string>
#include <vector>

#include "uspl/eval.hpp"

namespace uspl {

/// Several fully paired views of the same labeled samples (columns are samples).
struct MultiViewDataset {
  std::vector<std::string> names;
  std::vector<DenseMatrix> views;
  std::vector<int> labels;

  Eigen::Index size() const { return static_cast<Eigen::Index>(labels.size()); }
  std::size_t index_of(const std::string& name) const;  // InvalidParameter if absent
  LabeledTwoView pair(const std::string& a, const std::string& b) const;
};

/// The six mfeat views in file order with their feature counts.
const std::vector<std::pair<std::string, Eigen::Index>>& mfeat_views();

/// Reads mfeat-{fac,fou,kar,mor,pix,zer} from dir. Row r (0-based) has class r / 200.
MultiViewDataset load_mfeat(const std::string& dir, bool standardize = false);

/// Whitespace- or comma-separated numeric rows. Every row must have the same width.
DenseMatrix read_delimited(const std::string& path);
void write_csv(const std::string& path, const DenseMatrix& m);

/// Views given as CSV files with samples as rows; labels one integer per row.
MultiViewDataset load_csv(const std::vector<std::string>& view_paths, const std::string& label_path,
                          bool standardize = false);

/// Per-feature z-scoring over samples; constant features are only centered.
void standardize_features(DenseMatrix& x);

}  // namespace uspl
