#pragma once

// Reference implementations used to check the library. They follow the
// textbook definitions directly and share no code with src/.

#include <cmath>
#include <functional>
#include <set>
#include <vector>

namespace oracle {

using LabelSet = std::set<int>;

struct SetMetrics {
  std::vector<double> f1;
  std::vector<double> auc;
  double micro = 0, macro = 0, weighted = 0, example = 0;
};

inline SetMetrics set_metrics(const std::vector<LabelSet>& truth, const std::vector<LabelSet>& pred, int labels) {
  SetMetrics m;
  double tp_all = 0, fp_all = 0, fn_all = 0;
  double weighted_num = 0, support_all = 0;
  for (int l = 0; l < labels; ++l) {
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      bool t = truth[i].count(l) > 0;
      bool p = pred[i].count(l) > 0;
      if (t && p) tp += 1;
      else if (!t && p) fp += 1;
      else if (t && !p) fn += 1;
      else tn += 1;
    }
    double f1 = (2 * tp + fp + fn) == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
    double auc = 0.5;
    if (tp + fn > 0 && tn + fp > 0) auc = 0.5 * (tp / (tp + fn) + tn / (tn + fp));
    m.f1.push_back(f1);
    m.auc.push_back(auc);
    tp_all += tp;
    fp_all += fp;
    fn_all += fn;
    weighted_num += (tp + fn) * f1;
    support_all += tp + fn;
    m.macro += f1;
  }
  m.macro /= labels;
  m.micro = (2 * tp_all + fp_all + fn_all) == 0 ? 0.0 : 2 * tp_all / (2 * tp_all + fp_all + fn_all);
  m.weighted = support_all == 0 ? 0.0 : weighted_num / support_all;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    double inter = 0;
    for (int l : truth[i]) inter += pred[i].count(l);
    double size = static_cast<double>(truth[i].size() + pred[i].size());
    m.example += size == 0 ? 1.0 : 2 * inter / size;
  }
  m.example /= static_cast<double>(truth.size());
  return m;
}

/// Pearson correlation, two-pass.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

/// Upper tail of chi-square(k) at x: one minus the trapezoid integral of the
/// density over [0, x], after substituting t = u^2 to remove the k = 1 pole.
inline double chi_square_sf_trapezoid(double x, int k, int steps = 20000) {
  if (x <= 0) return 1.0;
  const double norm = std::pow(2.0, k / 2.0) * std::tgamma(k / 2.0);
  auto g = [&](double u) { return 2.0 * std::pow(u, k - 1) * std::exp(-u * u / 2.0) / norm; };
  const double b = std::sqrt(x);
  const double h = b / steps;
  double sum = 0.5 * (g(0.0) + g(b));
  for (int i = 1; i < steps; ++i) sum += g(i * h);
  return 1.0 - sum * h;
}

/// Cohen's kappa on two 0/1 vectors from the 2x2 agreement table.
inline double kappa(const std::vector<int>& a, const std::vector<int>& b) {
  double n = static_cast<double>(a.size());
  double n11 = 0, n00 = 0, a1 = 0, b1 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    n11 += a[i] && b[i];
    n00 += !a[i] && !b[i];
    a1 += a[i];
    b1 += b[i];
  }
  double po = (n11 + n00) / n;
  double pe = (a1 / n) * (b1 / n) + (1 - a1 / n) * (1 - b1 / n);
  return (po - pe) / (1 - pe);
}

/// Central-difference gradient.
template <typename Vec>
Vec numeric_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-5) {
  Vec g = x;
  for (int i = 0; i < static_cast<int>(x.size()); ++i) {
    Vec up = x, down = x;
    up[i] += h;
    down[i] -= h;
    g[i] = (f(up) - f(down)) / (2 * h);
  }
  return g;
}

}  // namespace oracle
