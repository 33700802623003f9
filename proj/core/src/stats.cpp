#include "selfpref/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <thread>

#include <Eigen/Dense>

#include "selfpref/csv.hpp"
#include "selfpref/error.hpp"
#include "selfpref/numeric.hpp"
#include "selfpref/random.hpp"

namespace selfpref {

std::string_view metric_name(BiasMetric m) {
  return m == BiasMetric::StatisticalParity ? "statistical-parity" : "equal-opportunity";
}

BiasEstimate parity_bias(const std::vector<EvaluationRecord>& records, double z) {
  BiasEstimate b;
  b.metric = BiasMetric::StatisticalParity;
  std::size_t k = 0;
  for (const auto& r : records) {
    if (!r.resolved()) {
      ++b.n_excluded;
      continue;
    }
    ++b.n_pairs;
    if (r.chose_self()) ++k;
  }
  if (b.n_pairs == 0) throw EstimationError("parity bias needs at least one resolved record");
  const double n = static_cast<double>(b.n_pairs);
  const double p = static_cast<double>(k) / n;
  b.self_rate = p;
  b.estimate = 2.0 * p - 1.0;
  const double half = z * std::sqrt(p * (1.0 - p) / n);
  b.ci_low = std::max(-1.0, 2.0 * (p - half) - 1.0);
  b.ci_high = std::min(1.0, 2.0 * (p + half) - 1.0);
  if (b.n_excluded) {
    b.warnings.push_back(std::to_string(b.n_excluded) + " malformed record(s) excluded");
  }
  return b;
}

namespace {

struct Conditioned {
  bool evaluator_better;
  bool correct;  // chose the truly better member
};

// Returns NaN for an empty cell.
double eo_statistic(const std::vector<Conditioned>& items, const std::vector<std::size_t>* idx,
                    bool zero_empty) {
  std::size_t ne = 0, ke = 0, no = 0, ko = 0;
  auto visit = [&](const Conditioned& c) {
    if (c.evaluator_better) {
      ++ne;
      ke += c.correct;
    } else {
      ++no;
      ko += c.correct;
    }
  };
  if (idx) {
    for (auto i : *idx) visit(items[i]);
  } else {
    for (const auto& c : items) visit(c);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double te = ne ? static_cast<double>(ke) / static_cast<double>(ne) : (zero_empty ? 0.0 : nan);
  const double to = no ? static_cast<double>(ko) / static_cast<double>(no) : (zero_empty ? 0.0 : nan);
  return te - to;
}

}  // namespace

BiasEstimate equal_opportunity_bias(const std::vector<EvaluationRecord>& records,
                                    const std::vector<GroundTruthLabel>& truth,
                                    const EqualOpportunityOptions& options) {
  BiasEstimate b;
  b.metric = BiasMetric::EqualOpportunity;
  std::map<std::string, TruthLabel> labels;
  for (const auto& t : truth) labels[t.pair_id] = t.label;

  std::vector<Conditioned> items;
  for (const auto& r : records) {
    if (!r.resolved()) {
      ++b.n_excluded;
      continue;
    }
    ++b.n_pairs;
    auto it = labels.find(r.pair_id);
    if (it == labels.end()) continue;
    if (it->second == TruthLabel::Tie) {
      ++b.n_ties;
      continue;
    }
    const Source own = Source::model(r.self_model);
    Position evaluator_pos;
    if (r.first_source == own) {
      evaluator_pos = Position::First;
    } else if (r.second_source == own) {
      evaluator_pos = Position::Second;
    } else {
      throw EstimationError("record " + r.pair_id + " has no member generated by " + r.self_model);
    }
    const Position better = it->second == TruthLabel::First ? Position::First : Position::Second;
    items.push_back({better == evaluator_pos, *r.chosen_position == better});
  }
  b.n_conditioned = items.size();
  if (items.empty()) throw EstimationError("equal opportunity bias: no conditioned pairs");
  for (const auto& c : items) (c.evaluator_better ? b.n_evaluator_better : b.n_other_better)++;

  if (b.n_evaluator_better == 0 || b.n_other_better == 0) {
    const std::string which = b.n_evaluator_better == 0 ? "evaluator-better" : "other-better";
    if (options.empty_cell == EmptyCellPolicy::Error) {
      throw EstimationError("equal opportunity bias: the " + which + " cell is empty");
    }
    b.warnings.push_back("the " + which + " cell is empty; its term is set to 0");
  }
  b.estimate = eo_statistic(items, nullptr, true);

  const std::size_t B = options.resamples;
  if (B == 0) throw ValidationError("bootstrap needs at least one resample");
  std::vector<double> reps(B);
  const std::size_t m = items.size();
  auto work = [&](std::size_t from, std::size_t to) {
    std::vector<std::size_t> idx(m);
    for (std::size_t rep = from; rep < to; ++rep) {
      Engine eng = make_engine(derive_seed(options.seed, static_cast<std::uint64_t>(rep)));
      for (auto& i : idx) i = static_cast<std::size_t>(uniform_index(eng, m));
      reps[rep] = eo_statistic(items, &idx, true);
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, B);
  if (threads == 1) {
    work(0, B);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back(work, B * t / threads, B * (t + 1) / threads);
    }
    for (auto& th : pool) th.join();
  }
  std::sort(reps.begin(), reps.end());
  b.ci_low = quantile_sorted(reps, 0.025);
  b.ci_high = quantile_sorted(reps, 0.975);
  if (b.ci_low > b.estimate || b.ci_high < b.estimate) {
    b.warnings.push_back("percentile interval widened to contain the point estimate");
    b.ci_low = std::min(b.ci_low, b.estimate);
    b.ci_high = std::max(b.ci_high, b.estimate);
  }
  if (b.n_ties) b.warnings.push_back(std::to_string(b.n_ties) + " tied pair(s) not conditioned");
  if (b.n_excluded) {
    b.warnings.push_back(std::to_string(b.n_excluded) + " malformed record(s) excluded");
  }
  return b;
}

nlohmann::json bias_to_json(const BiasEstimate& b) {
  nlohmann::json j{{"metric", metric_name(b.metric)},
                   {"estimate", b.estimate},
                   {"ci_low", b.ci_low},
                   {"ci_high", b.ci_high},
                   {"n_pairs", b.n_pairs},
                   {"n_excluded", b.n_excluded},
                   {"warnings", b.warnings}};
  if (b.metric == BiasMetric::StatisticalParity) {
    j["self_selection_rate"] = b.self_rate;
  } else {
    j["n_conditioned"] = b.n_conditioned;
    j["n_evaluator_better"] = b.n_evaluator_better;
    j["n_other_better"] = b.n_other_better;
    j["n_ties"] = b.n_ties;
  }
  return j;
}

// ---------------------------------------------------------------------------

FeatureVector resume_features(const Resume& r, const Lexicon& lexicon,
                              const ExternalScores* external) {
  FeatureVector f = text::lexicon_features(r.summary, lexicon);
  f.merge(text::auto_scores(r.summary, r.body).scores);
  if (external) {
    if (auto it = external->find(r.id); it != external->end()) f.merge(it->second);
  }
  return f;
}

std::vector<double> FeatureTable::column(std::size_t j) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.dx.at(j));
  return out;
}

FeatureTable FeatureTable::subset(const std::vector<std::string>& keep) const {
  std::vector<std::size_t> idx;
  for (const auto& k : keep) {
    auto it = std::find(names.begin(), names.end(), k);
    if (it == names.end()) throw ValidationError("unknown feature '" + k + "'");
    idx.push_back(static_cast<std::size_t>(it - names.begin()));
  }
  FeatureTable t;
  t.names = keep;
  t.excluded = excluded;
  t.warnings = warnings;
  for (const auto& r : rows) {
    PairFeatureRow nr{r.pair_id, {}, r.preferred_evaluator};
    for (auto j : idx) nr.dx.push_back(r.dx[j]);
    t.rows.push_back(std::move(nr));
  }
  return t;
}

FeatureTable build_feature_table(const std::vector<ResumePair>& pairs, const ResumeStore& store,
                                 const std::vector<EvaluationRecord>& records,
                                 const std::map<std::string, FeatureVector>& features,
                                 const std::vector<FeatureFamily>& families) {
  std::map<std::string, const ResumePair*> by_id;
  for (const auto& p : pairs) by_id[p.pair_id] = &p;

  struct Item {
    const EvaluationRecord* record;
    const FeatureVector* own;
    const FeatureVector* other;
  };
  FeatureTable t;
  std::vector<Item> items;
  auto lookup = [&](const std::string& id) -> const FeatureVector& {
    auto it = features.find(id);
    if (it == features.end()) throw ValidationError("no features computed for resume '" + id + "'");
    return it->second;
  };
  for (const auto& r : records) {
    auto it = by_id.find(r.pair_id);
    if (!r.resolved() || it == by_id.end()) {
      ++t.excluded;
      continue;
    }
    const auto& p = *it->second;
    const bool own_first = p.evaluator_position(store) == Position::First;
    const auto& own_id = own_first ? p.member_first : p.member_second;
    const auto& other_id = own_first ? p.member_second : p.member_first;
    items.push_back({&r, &lookup(own_id), &lookup(other_id)});
  }

  auto wanted = [&](FeatureFamily f) {
    return families.empty() || std::find(families.begin(), families.end(), f) != families.end();
  };
  std::map<std::string, std::size_t> counts;
  for (const auto& it : items) {
    for (const auto* fv : {it.own, it.other}) {
      for (const auto& e : fv->entries()) {
        if (wanted(e.family)) ++counts[e.id];
      }
    }
  }
  std::vector<std::string> partial;
  for (const auto& [id, c] : counts) {
    if (c == 2 * items.size()) {
      t.names.push_back(id);
    } else {
      partial.push_back(id);
    }
  }
  if (!partial.empty()) {
    std::string list;
    for (const auto& id : partial) list += (list.empty() ? "" : ", ") + id;
    t.warnings.push_back("features missing for some resumes were dropped: " + list);
  }
  for (const auto& it : items) {
    PairFeatureRow row;
    row.pair_id = it.record->pair_id;
    row.preferred_evaluator = it.record->chose_self();
    for (const auto& id : t.names) row.dx.push_back(it.own->at(id) - it.other->at(id));
    t.rows.push_back(std::move(row));
  }
  if (t.excluded) {
    t.warnings.push_back(std::to_string(t.excluded) + " unresolved or unmatched record(s) excluded");
  }
  return t;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0 || syy <= 0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

namespace {

double sample_sd(const std::vector<double>& x) {
  if (x.size() < 2) return 0;
  double m = 0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

}  // namespace

FeatureSelection select_features(const FeatureTable& table, const SelectionOptions& options) {
  if (table.rows.size() < 2) throw ValidationError("feature selection needs at least two rows");
  FeatureSelection sel;
  std::vector<std::pair<std::string, std::vector<double>>> cols;
  for (std::size_t j = 0; j < table.names.size(); ++j) cols.emplace_back(table.names[j], table.column(j));
  std::sort(cols.begin(), cols.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<std::size_t> stage1;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (sample_sd(cols[j].second) < options.min_sd) {
      sel.dropped.push_back({cols[j].first, "near-constant difference"});
    } else {
      stage1.push_back(j);
    }
  }

  std::vector<std::size_t> stage2;
  for (auto j : stage1) {
    std::optional<std::size_t> twin;
    for (auto k : stage2) {
      if (std::fabs(pearson(cols[j].second, cols[k].second)) > options.max_abs_correlation) {
        twin = k;
        break;
      }
    }
    if (twin) {
      sel.dropped.push_back({cols[j].first, "correlated with " + cols[*twin].first});
    } else {
      stage2.push_back(j);
    }
  }

  std::vector<double> y;
  for (const auto& r : table.rows) y.push_back(r.preferred_evaluator ? 1.0 : 0.0);
  std::vector<std::pair<double, std::size_t>> ranked;
  for (auto j : stage2) {
    const double r = pearson(cols[j].second, y);
    ranked.emplace_back(std::isfinite(r) ? std::fabs(r) : 0.0, j);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& name = cols[ranked[i].second].first;
    if (i < options.top_k) {
      sel.kept.push_back(name);
    } else {
      sel.dropped.push_back({name, "outside top " + std::to_string(options.top_k)});
    }
  }
  std::sort(sel.kept.begin(), sel.kept.end());
  return sel;
}

// ---------------------------------------------------------------------------

namespace {

struct Design {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

Design make_design(const FeatureTable& t) {
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  const auto p = static_cast<Eigen::Index>(t.names.size() + 1);
  Design d{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = t.rows[static_cast<std::size_t>(i)];
    if (r.dx.size() + 1 != static_cast<std::size_t>(p)) {
      throw ValidationError("row " + r.pair_id + " has the wrong number of features");
    }
    d.X(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < p; ++j) {
      const double v = r.dx[static_cast<std::size_t>(j - 1)];
      if (!std::isfinite(v)) throw ValidationError("non-finite feature difference in " + r.pair_id);
      d.X(i, j) = v;
    }
    d.y(i) = r.preferred_evaluator ? 1.0 : 0.0;
  }
  return d;
}

double log1pexp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

Eigen::VectorXd sigmoid(const Eigen::VectorXd& eta) {
  return eta.unaryExpr([](double e) {
    return e >= 0 ? 1.0 / (1.0 + std::exp(-e)) : std::exp(e) / (1.0 + std::exp(e));
  });
}

double loglik(const Design& d, const Eigen::VectorXd& beta, double ridge) {
  const Eigen::VectorXd eta = d.X * beta;
  double v = 0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) v += d.y(i) * eta(i) - log1pexp(eta(i));
  return v - 0.5 * ridge * beta.squaredNorm();
}

Eigen::VectorXd gradient(const Design& d, const Eigen::VectorXd& beta, double ridge) {
  return d.X.transpose() * (d.y - sigmoid(d.X * beta)) - ridge * beta;
}

// Information matrix X'WX + ridge*I (the negated Hessian).
Eigen::MatrixXd information(const Design& d, const Eigen::VectorXd& beta, double ridge) {
  const Eigen::VectorXd mu = sigmoid(d.X * beta);
  const Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
  Eigen::MatrixXd info = d.X.transpose() * w.asDiagonal() * d.X;
  info.diagonal().array() += ridge;
  return info;
}

}  // namespace

LoglikDerivatives loglik_gradient_hessian(const std::vector<double>& beta,
                                          const FeatureTable& table, double ridge) {
  const Design d = make_design(table);
  if (beta.size() != static_cast<std::size_t>(d.X.cols())) {
    throw ValidationError("beta has " + std::to_string(beta.size()) + " entries; expected " +
                          std::to_string(d.X.cols()));
  }
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
  LoglikDerivatives out;
  out.value = loglik(d, b, ridge);
  const Eigen::VectorXd g = gradient(d, b, ridge);
  out.gradient.assign(g.data(), g.data() + g.size());
  const Eigen::MatrixXd h = -information(d, b, ridge);
  out.hessian.assign(static_cast<std::size_t>(h.rows()), std::vector<double>(static_cast<std::size_t>(h.cols())));
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
      out.hessian[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = h(i, j);
    }
  }
  return out;
}

FitResult fit_conditional_logit(const FeatureTable& table, const FitOptions& options) {
  FitResult f;
  f.terms.emplace_back(kEvaluatorTerm);
  f.terms.insert(f.terms.end(), table.names.begin(), table.names.end());
  f.n_pairs = table.rows.size();
  f.n_observations = 2 * table.rows.size();
  f.ridge = options.ridge;
  f.warnings = table.warnings;
  if (options.ridge < 0) throw ValidationError("ridge must be >= 0");

  const Design d = make_design(table);
  const auto p = d.X.cols();
  if (d.X.rows() <= p) {
    throw EstimationError("need more pairs (" + std::to_string(d.X.rows()) + ") than terms (" +
                          std::to_string(p) + ")");
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    std::string names;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < p; ++k) {
      names += (names.empty() ? "" : ", ") + f.terms[static_cast<std::size_t>(perm(k))];
    }
    throw EstimationError("rank-deficient design (rank " + std::to_string(qr.rank()) + " of " +
                          std::to_string(p) + "); collinear features: " + names);
  }

  const double ridge = options.ridge;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double value = loglik(d, beta, ridge);
  auto separation = [&] {
    return EstimationError(
        "complete or quasi-complete separation: coefficients diverge; refit with a ridge "
        "penalty (e.g. --ridge 1e-4)");
  };
  for (int it = 0; it < options.max_iterations; ++it) {
    const Eigen::VectorXd g = gradient(d, beta, ridge);
    f.gradient_max_norm = g.cwiseAbs().maxCoeff();
    if (f.gradient_max_norm < options.tolerance) {
      f.converged = true;
      break;
    }
    const Eigen::VectorXd step = information(d, beta, ridge).ldlt().solve(g);
    double t = 1.0;
    Eigen::VectorXd next = beta + step;
    double next_value = loglik(d, next, ridge);
    for (int h = 0; h < 50 && !(next_value >= value - 1e-12 * std::fabs(value)); ++h) {
      t *= 0.5;
      next = beta + t * step;
      next_value = loglik(d, next, ridge);
    }
    beta = next;
    value = next_value;
    f.iterations = it + 1;
    if (ridge == 0 && beta.cwiseAbs().maxCoeff() > options.separation_bound) throw separation();
  }
  if (!f.converged) {
    f.gradient_max_norm = gradient(d, beta, ridge).cwiseAbs().maxCoeff();
    f.converged = f.gradient_max_norm < options.tolerance;
  }
  if (ridge == 0 && (d.X * beta).cwiseAbs().maxCoeff() > 18.0) throw separation();

  f.beta.assign(beta.data(), beta.data() + p);
  f.log_likelihood = loglik(d, beta, 0.0);
  f.null_log_likelihood = static_cast<double>(d.X.rows()) * std::log(0.5);
  f.pseudo_r2 = std::max(0.0, 1.0 - f.log_likelihood / f.null_log_likelihood);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  f.robust_se.assign(static_cast<std::size_t>(p), nan);
  f.z.assign(static_cast<std::size_t>(p), nan);
  f.p.assign(static_cast<std::size_t>(p), nan);
  if (!f.converged) {
    f.warnings.push_back("Newton-Raphson did not converge in " +
                         std::to_string(options.max_iterations) +
                         " iterations; standard errors suppressed");
    return f;
  }
  const Eigen::MatrixXd bread = information(d, beta, ridge).inverse();
  const Eigen::VectorXd resid = d.y - sigmoid(d.X * beta);
  const Eigen::MatrixXd scores = d.X.array().colwise() * resid.array();
  const Eigen::MatrixXd meat = scores.transpose() * scores;
  const double g = static_cast<double>(d.X.rows());
  const Eigen::MatrixXd v = bread * meat * bread * (g / (g - 1.0));
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto k = static_cast<std::size_t>(j);
    f.robust_se[k] = std::sqrt(std::max(0.0, v(j, j)));
    f.z[k] = f.beta[k] / f.robust_se[k];
    f.p[k] = normal_two_sided_p(f.z[k]);
  }
  return f;
}

double beta_to_bias(double beta1) { return std::tanh(beta1 / 2.0); }

std::string significance_stars(double p) {
  if (!std::isfinite(p)) return "";
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

nlohmann::json fit_to_json(const FitResult& f) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json coefs = nlohmann::json::array();
  for (std::size_t k = 0; k < f.terms.size(); ++k) {
    coefs.push_back({{"term", f.terms[k]},
                     {"estimate", num(f.beta[k])},
                     {"robust_se", num(f.robust_se[k])},
                     {"z", num(f.z[k])},
                     {"p", num(f.p[k])},
                     {"stars", significance_stars(f.p[k])}});
  }
  return {{"coefficients", coefs},
          {"log_likelihood", f.log_likelihood},
          {"null_log_likelihood", f.null_log_likelihood},
          {"null_model", "all coefficients zero"},
          {"pseudo_r2", f.pseudo_r2},
          {"converged", f.converged},
          {"iterations", f.iterations},
          {"gradient_max_norm", f.gradient_max_norm},
          {"n_pairs", f.n_pairs},
          {"n_observations", f.n_observations},
          {"ridge", f.ridge},
          {"implied_bias", f.beta.empty() ? nlohmann::json(nullptr) : num(beta_to_bias(f.beta[0]))},
          {"warnings", f.warnings}};
}

FitResult fit_from_json(const nlohmann::json& j) {
  auto num = [](const nlohmann::json& v) {
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  };
  try {
    FitResult f;
    for (const auto& c : j.at("coefficients")) {
      f.terms.push_back(c.at("term").get<std::string>());
      f.beta.push_back(num(c.at("estimate")));
      f.robust_se.push_back(num(c.at("robust_se")));
      f.z.push_back(num(c.at("z")));
      f.p.push_back(num(c.at("p")));
    }
    f.log_likelihood = j.at("log_likelihood").get<double>();
    f.null_log_likelihood = j.at("null_log_likelihood").get<double>();
    f.pseudo_r2 = j.at("pseudo_r2").get<double>();
    f.converged = j.at("converged").get<bool>();
    f.iterations = j.at("iterations").get<int>();
    f.gradient_max_norm = j.at("gradient_max_norm").get<double>();
    f.n_pairs = j.at("n_pairs").get<std::size_t>();
    f.n_observations = j.at("n_observations").get<std::size_t>();
    f.ridge = j.at("ridge").get<double>();
    f.warnings = j.value("warnings", std::vector<std::string>{});
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("fit result: ") + e.what());
  }
}

std::string fit_to_csv(const FitResult& f) {
  std::string out = "term,estimate,robust_se,z,p,stars\n";
  for (std::size_t k = 0; k < f.terms.size(); ++k) {
    out += csv::join_row({f.terms[k], fixed(f.beta[k], 3), fixed(f.robust_se[k], 3),
                          fixed(f.z[k], 3), fixed(f.p[k], 3), significance_stars(f.p[k])});
    out += '\n';
  }
  return out;
}

namespace {

std::string thousands(std::size_t n) {
  std::string s = std::to_string(n);
  for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
  return s;
}

std::string pad_left(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

}  // namespace

std::string render_regression_table(const std::vector<std::pair<std::string, FitResult>>& columns) {
  std::vector<std::string> terms;
  for (const auto& [_, f] : columns) {
    for (const auto& t : f.terms) {
      if (std::find(terms.begin(), terms.end(), t) == terms.end()) terms.push_back(t);
    }
  }
  std::size_t label_w = 18;
  for (const auto& t : terms) label_w = std::max(label_w, t.size() + 2);
  std::size_t col_w = 12;
  for (const auto& [name, _] : columns) col_w = std::max(col_w, name.size() + 2);

  std::string out = pad_right("", label_w);
  for (const auto& [name, _] : columns) out += pad_left(name, col_w);
  out += "\n" + std::string(label_w + col_w * columns.size(), '-') + "\n";
  for (const auto& t : terms) {
    std::string est = pad_right(t, label_w), se = pad_right("", label_w);
    for (const auto& [_, f] : columns) {
      auto it = std::find(f.terms.begin(), f.terms.end(), t);
      if (it == f.terms.end()) {
        est += pad_left("", col_w);
        se += pad_left("", col_w);
        continue;
      }
      const auto k = static_cast<std::size_t>(it - f.terms.begin());
      const std::string stars = significance_stars(f.p[k]);
      // Stars hang to the right of the number so estimates stay aligned.
      est += pad_left(fixed(f.beta[k], 3), col_w - 3) + pad_right(stars, 3);
      se += pad_left("(" + fixed(f.robust_se[k], 3) + ")", col_w - 3) + "   ";
    }
    out += est + "\n" + se + "\n";
  }
  out += std::string(label_w + col_w * columns.size(), '-') + "\n";
  auto stat_row = [&](const std::string& label, auto get) {
    out += pad_right(label, label_w);
    for (const auto& [_, f] : columns) out += pad_left(get(f), col_w - 3) + "   ";
    out += "\n";
  };
  stat_row("Observations", [](const FitResult& f) { return thousands(f.n_observations); });
  stat_row("Pairs", [](const FitResult& f) { return thousands(f.n_pairs); });
  stat_row("Pseudo R-squared", [](const FitResult& f) { return fixed(f.pseudo_r2, 3); });
  stat_row("Log likelihood", [](const FitResult& f) { return fixed(f.log_likelihood, 3); });
  stat_row("Implied bias", [](const FitResult& f) {
    return f.beta.empty() ? std::string("NA") : fixed(beta_to_bias(f.beta[0]), 3);
  });
  out += "Robust standard errors clustered by pair in parentheses.\n";
  out += "*** p<0.01, ** p<0.05, * p<0.1\n";
  return out;
}

}  // namespace selfpref
