#include "pxt/assoc.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pxt/csv.hpp"
#include "pxt/error.hpp"
#include "pxt/special_functions.hpp"

namespace pxt {

namespace {

std::optional<long> as_integer(const std::string& s) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool category_less(const std::string& a, const std::string& b) {
  auto ia = as_integer(a);
  auto ib = as_integer(b);
  if (ia && ib) return *ia < *ib;
  if (ia != ib && (ia || ib)) return ia.has_value();
  return a < b;
}

ContingencyTable prune(ContingencyTable t) {
  std::vector<Eigen::Index> rows, cols;
  for (Eigen::Index r = 0; r < t.counts.rows(); ++r) {
    if (t.counts.row(r).sum() > 0) rows.push_back(r);
  }
  for (Eigen::Index c = 0; c < t.counts.cols(); ++c) {
    if (t.counts.col(c).sum() > 0) cols.push_back(c);
  }
  if (rows.size() < 2 || cols.size() < 2) {
    throw Error(ErrorCode::DegenerateTable,
                fmt::format("table is {}x{} after removing empty margins", rows.size(), cols.size()));
  }
  ContingencyTable out;
  out.counts.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row_labels.push_back(t.row_labels[static_cast<std::size_t>(rows[r])]);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out.counts(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t.counts(rows[r], cols[c]);
    }
  }
  for (auto c : cols) out.col_labels.push_back(t.col_labels[static_cast<std::size_t>(c)]);
  out.n = out.counts.sum();
  return out;
}

}  // namespace

ContingencyTable build_contingency(const std::vector<int>& topic_bits, const std::vector<Categorical>& categories) {
  if (topic_bits.size() != categories.size()) {
    throw Error(ErrorCode::LengthMismatch, "topic bits and categories differ in length");
  }
  std::vector<std::string> levels;
  for (const auto& c : categories) {
    if (c) levels.push_back(*c);
  }
  std::sort(levels.begin(), levels.end(), category_less);
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  ContingencyTable t;
  t.row_labels = {"absent", "present"};
  t.col_labels = levels;
  t.counts = CountMatrix::Zero(2, static_cast<Eigen::Index>(levels.size()));
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (!categories[i]) continue;
    auto it = std::lower_bound(levels.begin(), levels.end(), *categories[i], category_less);
    t.counts(topic_bits[i] ? 1 : 0, it - levels.begin()) += 1;
  }
  return prune(std::move(t));
}

ContingencyTable make_contingency(const CountMatrix& counts) {
  ContingencyTable t;
  t.counts = counts;
  for (Eigen::Index r = 0; r < counts.rows(); ++r) t.row_labels.push_back("r" + std::to_string(r));
  for (Eigen::Index c = 0; c < counts.cols(); ++c) t.col_labels.push_back("c" + std::to_string(c));
  if ((counts.array() < 0).any()) throw Error(ErrorCode::DegenerateTable, "negative count");
  return prune(std::move(t));
}

ChiSquareResult chi_square_test(const ContingencyTable& table) {
  if (table.counts.rows() < 2 || table.counts.cols() < 2 || table.n <= 0) {
    throw Error(ErrorCode::DegenerateTable, "chi-square needs at least a 2x2 table");
  }
  Eigen::ArrayXXd observed = table.counts.cast<double>().array();
  Eigen::VectorXd row_sums = observed.rowwise().sum();
  Eigen::RowVectorXd col_sums = observed.colwise().sum();
  Eigen::ArrayXXd expected = (row_sums * col_sums).array() / static_cast<double>(table.n);

  ChiSquareResult r;
  r.statistic = ((observed - expected).square() / expected).sum();
  r.dof = static_cast<int>((table.counts.rows() - 1) * (table.counts.cols() - 1));
  r.p_value = special::chi_square_sf(r.statistic, r.dof);
  r.min_expected = expected.minCoeff();
  r.low_expected = r.min_expected < 5.0;
  return r;
}

std::string_view to_string(Band band) {
  switch (band) {
    case Band::NegligibleToSmall: return "Negligible to Small";
    case Band::SmallToMedium: return "Small to Medium";
    case Band::MediumToLarge: return "Medium to Large";
    case Band::VeryLarge: return "Very Large";
  }
  return "?";
}

Band cramers_band(double v, int dof_star) {
  const double scale = std::sqrt(static_cast<double>(std::max(dof_star, 1)));
  if (v < 0.10 / scale) return Band::NegligibleToSmall;
  if (v < 0.30 / scale) return Band::SmallToMedium;
  if (v < 0.50 / scale) return Band::MediumToLarge;
  return Band::VeryLarge;
}

CramersVResult cramers_v(const ChiSquareResult& chi, const ContingencyTable& table) {
  CramersVResult r;
  r.dof_star = static_cast<int>(std::min(table.counts.rows() - 1, table.counts.cols() - 1));
  r.v = std::sqrt(chi.statistic / (static_cast<double>(table.n) * r.dof_star));
  r.v = std::clamp(r.v, 0.0, 1.0);
  r.band = cramers_band(r.v, r.dof_star);
  return r;
}

PointBiserialResult point_biserial(const std::vector<int>& topic_bits, const std::vector<double>& y) {
  if (topic_bits.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "topic bits and y differ in length");
  const Eigen::Index n = static_cast<Eigen::Index>(y.size());
  Eigen::Map<const Eigen::ArrayXd> values(y.data(), n);
  Eigen::ArrayXd bits(n);
  for (Eigen::Index i = 0; i < n; ++i) bits(i) = topic_bits[static_cast<std::size_t>(i)] ? 1.0 : 0.0;

  const double n1 = bits.sum();
  const double n0 = static_cast<double>(n) - n1;
  if (n1 == 0 || n0 == 0) throw Error(ErrorCode::SingleGroup, "point-biserial needs both groups non-empty");
  const double mean = values.mean();
  const double sn = std::sqrt((values - mean).square().mean());
  if (sn == 0) throw Error(ErrorCode::ConstantInput, "point-biserial of a constant variable");

  const double m1 = (values * bits).sum() / n1;
  const double m0 = (values * (1.0 - bits)).sum() / n0;
  const double p = n1 / static_cast<double>(n);
  PointBiserialResult r;
  r.n = static_cast<long>(n);
  r.r = std::clamp((m1 - m0) / sn * std::sqrt(p * (1.0 - p)), -1.0, 1.0);
  if (n <= 2) {
    r.t_stat = 0.0;
    r.p_value = 1.0;
  } else if (std::abs(r.r) >= 1.0) {
    r.t_stat = std::copysign(std::numeric_limits<double>::infinity(), r.r);
    r.p_value = 0.0;
  } else {
    const double df = static_cast<double>(n - 2);
    r.t_stat = r.r * std::sqrt(df / (1.0 - r.r * r.r));
    r.p_value = special::student_t_two_sided(r.t_stat, df);
  }
  return r;
}

int top_box(int rating, int min_rating, int max_rating) {
  if (rating < min_rating || rating > max_rating) {
    throw Error(ErrorCode::OutOfRange,
                fmt::format("rating {} outside declared range {}-{}", rating, min_rating, max_rating));
  }
  return rating >= 9 ? 1 : 0;
}

// ---------------------------------------------------------------------------

std::string GridCell::label() const {
  if (status != CellStatus::Ok) return "n/a";
  return significant ? std::string(to_string(strength.band)) : std::string();
}

namespace {

struct Joined {
  std::vector<const LabelVector*> labels;
  std::vector<const SurveyRecord*> records;
};

Joined join(const std::map<std::string, LabelVector>& predictions, const std::vector<SurveyRecord>& records) {
  Joined j;
  for (const auto& r : records) {
    auto it = predictions.find(r.comment_id);
    if (it == predictions.end()) continue;
    j.labels.push_back(&it->second);
    j.records.push_back(&r);
  }
  return j;
}

}  // namespace

AssociationGrid association_matrix(const std::map<std::string, LabelVector>& predictions,
                                   const std::vector<SurveyRecord>& records, const SurveySchema& schema,
                                   double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::ConfigInvalid, "alpha must lie in (0, 1)");
  const Joined joined = join(predictions, records);
  AssociationGrid grid;
  grid.alpha = alpha;
  grid.n_joined = joined.records.size();
  for (auto name : topic_names()) grid.topics.emplace_back(name);
  for (const auto& v : schema.variables) grid.variables.push_back(v.name);

  std::vector<std::vector<Categorical>> columns(schema.variables.size());
  for (std::size_t v = 0; v < schema.variables.size(); ++v) {
    for (const auto* r : joined.records) columns[v].push_back(r->category(schema.variables[v].name));
  }
  for (std::size_t t = 0; t < kTopicCount; ++t) {
    std::vector<int> bits;
    for (const auto* l : joined.labels) bits.push_back(l->test(t) ? 1 : 0);
    for (std::size_t v = 0; v < schema.variables.size(); ++v) {
      GridCell cell;
      cell.topic = grid.topics[t];
      cell.variable = grid.variables[v];
      try {
        ContingencyTable table = build_contingency(bits, columns[v]);
        cell.n = table.n;
        cell.chi = chi_square_test(table);
        cell.strength = cramers_v(cell.chi, table);
        cell.significant = cell.chi.p_value < alpha;
        if (cell.chi.low_expected) cell.note = fmt::format("min expected count {:.2f} < 5", cell.chi.min_expected);
      } catch (const Error& e) {
        cell.status = e.code() == ErrorCode::DegenerateTable ? CellStatus::Degenerate : CellStatus::Failed;
        cell.note = e.what();
      }
      grid.cells.push_back(std::move(cell));
    }
  }
  return grid;
}

std::string grid_csv(const AssociationGrid& grid) {
  std::vector<std::string> header{"Variable"};
  header.insert(header.end(), grid.topics.begin(), grid.topics.end());
  std::string out = csv::format_row(header);
  for (std::size_t v = 0; v < grid.variables.size(); ++v) {
    std::vector<std::string> row{grid.variables[v]};
    for (std::size_t t = 0; t < grid.topics.size(); ++t) row.push_back(grid.at(t, v).label());
    out += csv::format_row(row);
  }
  return out;
}

namespace {

std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string_view band_color(Band b) {
  switch (b) {
    case Band::NegligibleToSmall: return "#e53935";
    case Band::SmallToMedium: return "#fb8c00";
    case Band::MediumToLarge: return "#43a047";
    case Band::VeryLarge: return "#1e88e5";
  }
  return "#ffffff";
}

constexpr Band kBands[] = {Band::NegligibleToSmall, Band::SmallToMedium, Band::MediumToLarge, Band::VeryLarge};

}  // namespace

std::string grid_html(const AssociationGrid& grid, const std::string& title) {
  std::string out = "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n";
  out += fmt::format("<title>{}</title>\n", html_escape(title));
  out += "<style>\n"
         "table { border-collapse: collapse; font-family: sans-serif; font-size: 13px; }\n"
         "th, td { border: 1px solid #999; padding: 4px 8px; text-align: center; }\n"
         "th.var { text-align: left; }\n"
         "td.na { color: #777; }\n"
         ".swatch { display: inline-block; width: 12px; height: 12px; margin-right: 4px; }\n"
         "</style>\n</head>\n<body>\n";
  out += fmt::format("<h2>{}</h2>\n", html_escape(title));
  out += fmt::format("<p>Chi-square test of independence, significance level {:g}; n = {}.</p>\n", grid.alpha,
                     grid.n_joined);
  out += "<table>\n<tr><th></th>";
  for (const auto& t : grid.topics) out += fmt::format("<th>{}</th>", html_escape(t));
  out += "</tr>\n";
  for (std::size_t v = 0; v < grid.variables.size(); ++v) {
    out += fmt::format("<tr><th class=\"var\">{}</th>", html_escape(grid.variables[v]));
    for (std::size_t t = 0; t < grid.topics.size(); ++t) {
      const GridCell& c = grid.at(t, v);
      if (c.status != CellStatus::Ok) {
        out += fmt::format("<td class=\"na\" title=\"{}\">n/a</td>", html_escape(c.note));
      } else if (c.significant) {
        out += fmt::format("<td style=\"background:{}\" title=\"V = {:.3f}, p = {:.3g}\">&#10003;</td>",
                           band_color(c.strength.band), c.strength.v, c.chi.p_value);
      } else {
        out += "<td></td>";
      }
    }
    out += "</tr>\n";
  }
  out += "</table>\n<p>";
  for (Band b : kBands) {
    out += fmt::format("<span class=\"swatch\" style=\"background:{}\"></span>{}&nbsp;&nbsp;", band_color(b),
                       to_string(b));
  }
  out += "</p>\n</body>\n</html>\n";
  return out;
}

std::string grid_json(const AssociationGrid& grid) {
  nlohmann::ordered_json j;
  j["alpha"] = grid.alpha;
  j["n"] = grid.n_joined;
  j["topics"] = grid.topics;
  j["variables"] = grid.variables;
  auto& cells = j["cells"] = nlohmann::ordered_json::array();
  for (const auto& c : grid.cells) {
    nlohmann::ordered_json e;
    e["topic"] = c.topic;
    e["variable"] = c.variable;
    e["label"] = c.label();
    if (c.status == CellStatus::Ok) {
      e["n"] = c.n;
      e["statistic"] = c.chi.statistic;
      e["dof"] = c.chi.dof;
      e["p_value"] = c.chi.p_value;
      e["cramers_v"] = c.strength.v;
      e["band"] = std::string(to_string(c.strength.band));
      e["min_expected"] = c.chi.min_expected;
    }
    if (!c.note.empty()) e["note"] = c.note;
    cells.push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

RegressionReport rating_analysis(const std::map<std::string, LabelVector>& predictions,
                                 const std::vector<SurveyRecord>& records, const SurveyVariable& rating,
                                 bool per_topic) {
  const Joined joined = join(predictions, records);
  std::vector<const LabelVector*> labels;
  std::vector<int> y;
  for (std::size_t i = 0; i < joined.records.size(); ++i) {
    auto it = joined.records[i]->ratings.find(rating.name);
    if (it == joined.records[i]->ratings.end() || !it->second) continue;
    labels.push_back(joined.labels[i]);
    y.push_back(*it->second);
  }
  if (y.empty()) throw Error(ErrorCode::EmptyInput, "no rated comments for '" + rating.name + "'");

  RegressionReport report;
  report.rating_variable = rating.name;
  report.per_topic = per_topic;
  report.n = y.size();
  double top = 0.0;
  for (int v : y) top += top_box(v, rating.min_rating, rating.max_rating);
  report.top_box_rate = top / static_cast<double>(y.size());

  std::vector<double> yd(y.begin(), y.end());
  std::vector<std::size_t> model_topics;
  for (std::size_t t = 0; t < kTopicCount; ++t) {
    RegressionRow row;
    row.topic = std::string(topic_names()[t]);
    std::vector<int> bits;
    for (const auto* l : labels) bits.push_back(l->test(t) ? 1 : 0);
    try {
      auto pb = point_biserial(bits, yd);
      row.correlation = pb.r;
      row.correlation_p = pb.p_value;
      model_topics.push_back(t);
    } catch (const Error& e) {
      row.note = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  if (model_topics.empty()) return report;

  Eigen::MatrixXd x(static_cast<Eigen::Index>(y.size()), static_cast<Eigen::Index>(model_topics.size()));
  std::vector<std::string> names;
  for (std::size_t c = 0; c < model_topics.size(); ++c) {
    names.emplace_back(topic_names()[model_topics[c]]);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = labels[i]->test(model_topics[c]) ? 1.0 : 0.0;
    }
  }
  auto record = [&](std::size_t c, const OrdinalLogitModel& m, Eigen::Index idx) {
    auto& row = report.rows[model_topics[c]];
    row.coefficient = m.coefficients(idx);
    if (std::isfinite(m.p_values(idx))) row.coefficient_p = m.p_values(idx);
    if (!m.converged) {
      report.converged = false;
      row.note = "fit did not converge";
    }
  };
  if (per_topic) {
    for (std::size_t c = 0; c < model_topics.size(); ++c) {
      try {
        auto idx = static_cast<Eigen::Index>(c);
        record(c, fit_ordinal_logit(x.col(idx), y, {names[c]}), 0);
      } catch (const Error& e) {
        report.rows[model_topics[c]].note = e.what();
        report.converged = false;
      }
    }
    return report;
  }
  try {
    auto model = fit_ordinal_logit(x, y, names);
    for (std::size_t c = 0; c < model_topics.size(); ++c) record(c, model, static_cast<Eigen::Index>(c));
  } catch (const Error& e) {
    for (auto t : model_topics) report.rows[t].note = e.what();
    report.converged = false;
  }
  return report;
}

namespace {

std::string opt(const std::optional<double>& v, int precision) {
  return v ? fmt::format("{:.{}f}", *v, precision) : std::string("n/a");
}

}  // namespace

std::string regression_text(const RegressionReport& report) {
  std::size_t w = 6;
  for (const auto& r : report.rows) w = std::max(w, r.topic.size());
  std::string out = fmt::format("{} (n = {}, Top Box = {:.2f}%)\n", report.rating_variable, report.n,
                                report.top_box_rate * 100.0);
  out += fmt::format("{:<{}}  {:>26}  {:>26}\n", "", w,
                     report.per_topic ? "Ordinal Logit (per topic)" : "Ordinal Logistic Regression", "Point-biserial");
  out += fmt::format("{:<{}}  {:>12}  {:>12}  {:>12}  {:>12}\n", "Topics", w, "Coefficient", "p-value",
                     "Correlation", "p-value");
  out += fmt::format("{:-<{}}  {:->12}  {:->12}  {:->12}  {:->12}\n", "", w, "", "", "", "");
  for (const auto& r : report.rows) {
    out += fmt::format("{:<{}}  {:>12}  {:>12}  {:>12}  {:>12}\n", r.topic, w, opt(r.coefficient, 4),
                       opt(r.coefficient_p, 4), opt(r.correlation, 4), opt(r.correlation_p, 4));
  }
  bool notes = false;
  for (const auto& r : report.rows) {
    if (r.note.empty()) continue;
    if (!notes) out += "\nNotes\n";
    notes = true;
    out += fmt::format("  {}: {}\n", r.topic, r.note);
  }
  return out;
}

std::string regression_csv(const RegressionReport& report) {
  std::string out = csv::format_row({"topic", "coefficient", "coefficient_p", "correlation", "correlation_p", "note"});
  auto cell = [](const std::optional<double>& v) { return v ? fmt::format("{:.6g}", *v) : std::string(); };
  for (const auto& r : report.rows) {
    out += csv::format_row({r.topic, cell(r.coefficient), cell(r.coefficient_p), cell(r.correlation),
                            cell(r.correlation_p), r.note});
  }
  return out;
}

std::string regression_json(const RegressionReport& report) {
  nlohmann::ordered_json j;
  j["rating_variable"] = report.rating_variable;
  j["model"] = report.per_topic ? "per_topic" : "joint";
  j["n"] = report.n;
  j["top_box_rate"] = report.top_box_rate;
  j["converged"] = report.converged;
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  auto val = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
  for (const auto& r : report.rows) {
    nlohmann::ordered_json e;
    e["topic"] = r.topic;
    e["coefficient"] = val(r.coefficient);
    e["coefficient_p"] = val(r.coefficient_p);
    e["correlation"] = val(r.correlation);
    e["correlation_p"] = val(r.correlation_p);
    if (!r.note.empty()) e["note"] = r.note;
    rows.push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

}  // namespace pxt
