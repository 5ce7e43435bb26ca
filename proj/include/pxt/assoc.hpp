#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "pxt/corpus.hpp"
#include "pxt/ordinal_logit.hpp"
#include "pxt/topics.hpp"

namespace pxt {

using CountMatrix = Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>;

struct ContingencyTable {
  std::vector<std::string> row_labels;  // "absent" / "present"
  std::vector<std::string> col_labels;
  CountMatrix counts;
  long n = 0;
};

/// Rows are topic 0/1, columns the observed categories (integers numerically,
/// then text). Missing categories are dropped pairwise; zero margins pruned.
/// Throws DegenerateTable below 2x2 after pruning, LengthMismatch.
ContingencyTable build_contingency(const std::vector<int>& topic_bits, const std::vector<Categorical>& categories);
/// Wraps raw counts with default labels, pruning zero margins.
ContingencyTable make_contingency(const CountMatrix& counts);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  double min_expected = 0.0;
  bool low_expected = false;  // min_expected < 5
};

ChiSquareResult chi_square_test(const ContingencyTable& table);

enum class Band { NegligibleToSmall, SmallToMedium, MediumToLarge, VeryLarge };

std::string_view to_string(Band band);
/// Cutoffs 0.10, 0.30, 0.50 divided by sqrt(dof_star).
Band cramers_band(double v, int dof_star);

struct CramersVResult {
  double v = 0.0;
  int dof_star = 1;
  Band band = Band::NegligibleToSmall;
};

CramersVResult cramers_v(const ChiSquareResult& chi, const ContingencyTable& table);

struct PointBiserialResult {
  double r = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  long n = 0;
};

/// Throws ConstantInput when y is constant, SingleGroup when a group is empty.
PointBiserialResult point_biserial(const std::vector<int>& topic_bits, const std::vector<double>& y);

/// 1 iff rating >= 9. Throws OutOfRange outside [min_rating, max_rating].
int top_box(int rating, int min_rating = 0, int max_rating = 10);

// ---------------------------------------------------------------------------
// Topic x variable grid

enum class CellStatus { Ok, Degenerate, Failed };

struct GridCell {
  std::string topic;
  std::string variable;
  CellStatus status = CellStatus::Ok;
  ChiSquareResult chi;
  CramersVResult strength;
  long n = 0;
  bool significant = false;
  std::string note;

  /// Band name when significant, "" when not, "n/a" when not computable.
  std::string label() const;
};

struct AssociationGrid {
  double alpha = 0.05;
  std::vector<std::string> topics;
  std::vector<std::string> variables;
  std::vector<GridCell> cells;  // topic-major
  std::size_t n_joined = 0;

  const GridCell& at(std::size_t topic, std::size_t variable) const {
    return cells[topic * variables.size() + variable];
  }
};

/// Comments are joined to survey records by comment id. Every schema variable
/// becomes a column; ratings are treated as categories.
AssociationGrid association_matrix(const std::map<std::string, LabelVector>& predictions,
                                   const std::vector<SurveyRecord>& records, const SurveySchema& schema,
                                   double alpha = 0.05);

std::string grid_csv(const AssociationGrid& grid);
std::string grid_html(const AssociationGrid& grid, const std::string& title = "Topic association");
std::string grid_json(const AssociationGrid& grid);

// ---------------------------------------------------------------------------
// Rating analysis

struct RegressionRow {
  std::string topic;
  std::optional<double> coefficient;
  std::optional<double> coefficient_p;
  std::optional<double> correlation;
  std::optional<double> correlation_p;
  std::string note;
};

struct RegressionReport {
  std::string rating_variable;
  bool per_topic = false;
  std::size_t n = 0;
  double top_box_rate = 0.0;
  bool converged = true;
  std::vector<RegressionRow> rows;
};

/// Ordinal logit of the rating on the topic bits (jointly, or one fit per
/// topic) plus point-biserial correlations. Topics never or always predicted
/// are left out of the model and reported with a note.
RegressionReport rating_analysis(const std::map<std::string, LabelVector>& predictions,
                                 const std::vector<SurveyRecord>& records, const SurveyVariable& rating,
                                 bool per_topic = false);

std::string regression_text(const RegressionReport& report);
std::string regression_csv(const RegressionReport& report);
std::string regression_json(const RegressionReport& report);

}  // namespace pxt
