#include "readability/classifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "readability/error.hpp"

namespace readability {

namespace {

void softmax_inplace(std::vector<double>& scores) {
  const double max_score = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (auto& s : scores) {
    s = std::exp(s - max_score);
    sum += s;
  }
  for (auto& s : scores) s /= sum;
}

std::vector<double> class_scores(const ProbabilisticModel& model,
                                 const std::vector<double>& x) {
  const std::size_t k = model.num_classes();
  const std::size_t arity = model.arity();
  std::vector<double> scores(k);
  for (std::size_t c = 0; c < k; ++c) {
    double s = model.biases[c];
    const double* w = model.weights.data() + c * arity;
    for (std::size_t f = 0; f < arity; ++f) s += w[f] * x[f];
    scores[c] = s;
  }
  return scores;
}

// Mean cross-entropy plus (l2 / 2N) * ||W||^2; gradient written into gw/gb.
double objective_and_gradient(const std::vector<std::vector<double>>& x,
                              const std::vector<std::size_t>& y, std::size_t k,
                              const std::vector<double>& w, const std::vector<double>& b,
                              double l2, std::vector<double>& gw,
                              std::vector<double>& gb) {
  const std::size_t n = x.size();
  const std::size_t arity = x.front().size();
  std::fill(gw.begin(), gw.end(), 0.0);
  std::fill(gb.begin(), gb.end(), 0.0);
  double loss = 0.0;
  std::vector<double> p(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      double s = b[c];
      const double* wc = w.data() + c * arity;
      for (std::size_t f = 0; f < arity; ++f) s += wc[f] * x[i][f];
      p[c] = s;
    }
    softmax_inplace(p);
    loss -= std::log(std::max(p[y[i]], 1e-300));
    for (std::size_t c = 0; c < k; ++c) {
      const double g = p[c] - (c == y[i] ? 1.0 : 0.0);
      gb[c] += g;
      double* gwc = gw.data() + c * arity;
      for (std::size_t f = 0; f < arity; ++f) gwc[f] += g * x[i][f];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  loss *= inv_n;
  for (auto& g : gb) g *= inv_n;
  double reg = 0.0;
  for (std::size_t idx = 0; idx < w.size(); ++idx) {
    gw[idx] = gw[idx] * inv_n + l2 * inv_n * w[idx];
    reg += w[idx] * w[idx];
  }
  loss += 0.5 * l2 * inv_n * reg;
  return loss;
}

} // namespace

ProbabilisticModel train(const std::vector<FeatureVector>& features,
                         const std::vector<int>& labels, const Hyperparameters& hyper,
                         std::uint64_t seed) {
  if (features.empty() || features.size() != labels.size()) {
    throw Error("train: features and labels must be nonempty and aligned");
  }
  for (const auto& fv : features) {
    for (const double v : fv.values) {
      if (!std::isfinite(v)) {
        throw Error("train: non-finite feature value in document '" + fv.doc_id + "'");
      }
    }
  }
  const std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) {
    throw Error("train: need at least 2 classes, got " +
                std::to_string(distinct.size()));
  }

  ProbabilisticModel model;
  model.class_labels.assign(distinct.begin(), distinct.end());
  model.feature_names = features.front().names;
  model.hyper = hyper;
  model.seed = seed;
  model.scaler = fit_scaler(features);

  const std::size_t n = features.size();
  const std::size_t k = model.class_labels.size();
  const std::size_t arity = model.feature_names.size();

  std::vector<std::vector<double>> x(n);
  std::vector<std::size_t> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = transform(model.scaler, features[i]).values;
    const auto it = std::lower_bound(model.class_labels.begin(),
                                     model.class_labels.end(), labels[i]);
    y[i] = static_cast<std::size_t>(it - model.class_labels.begin());
  }

  // Full-batch gradient descent with Armijo backtracking. The objective is
  // convex and initialization is zero, so the optimum is reproducible.
  std::vector<double> w(k * arity, 0.0), b(k, 0.0);
  std::vector<double> gw(k * arity), gb(k);
  std::vector<double> w_try(k * arity), b_try(k);
  std::vector<double> gw_try(k * arity), gb_try(k);

  double loss = objective_and_gradient(x, y, k, w, b, hyper.l2, gw, gb);
  double step = 1.0;
  for (int iter = 0; iter < hyper.max_iter; ++iter) {
    double grad_max = 0.0;
    double grad_norm2 = 0.0;
    for (const double g : gw) {
      grad_max = std::max(grad_max, std::abs(g));
      grad_norm2 += g * g;
    }
    for (const double g : gb) {
      grad_max = std::max(grad_max, std::abs(g));
      grad_norm2 += g * g;
    }
    if (grad_max <= hyper.tol) break;

    double trial_loss = 0.0;
    bool accepted = false;
    for (int backtrack = 0; backtrack < 60; ++backtrack) {
      for (std::size_t idx = 0; idx < w.size(); ++idx) w_try[idx] = w[idx] - step * gw[idx];
      for (std::size_t c = 0; c < k; ++c) b_try[c] = b[c] - step * gb[c];
      trial_loss = objective_and_gradient(x, y, k, w_try, b_try, hyper.l2, gw_try, gb_try);
      if (trial_loss <= loss - 1e-4 * step * grad_norm2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break; // step underflow: we are at numerical convergence
    w.swap(w_try);
    b.swap(b_try);
    gw.swap(gw_try);
    gb.swap(gb_try);
    loss = trial_loss;
    step = std::min(step * 2.0, 1e6);
  }

  model.weights = std::move(w);
  model.biases = std::move(b);
  return model;
}

ClassProbabilities predict_proba(const ProbabilisticModel& model,
                                 const FeatureVector& fv) {
  if (fv.values.size() != model.arity()) {
    throw Error("predict_proba: feature arity mismatch (" +
                std::to_string(fv.values.size()) + " vs " +
                std::to_string(model.arity()) + ")");
  }
  const auto x = transform(model.scaler, fv).values;
  auto scores = class_scores(model, x);
  softmax_inplace(scores);
  return {std::move(scores), fv.doc_id};
}

int predict(const ProbabilisticModel& model, const FeatureVector& fv) {
  const auto probs = predict_proba(model, fv).probs;
  std::size_t best = 0;
  for (std::size_t c = 1; c < probs.size(); ++c) {
    if (probs[c] > probs[best]) best = c; // strict: ties stay on the easier class
  }
  return model.class_labels[best];
}

// ---------------------------------------------------------------------------
// Model container: "RDLM" magic + one version byte at offset 0, then
// little-endian fields. Doubles are stored as raw bit patterns.

namespace {

constexpr char kMagic[4] = {'R', 'D', 'L', 'M'};
constexpr std::uint8_t kVersion = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, 4);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint64_t get_u64(std::istream& in) {
  char buf[8];
  if (!in.read(buf, 8)) throw ParseError("corrupt model file: truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  }
  return v;
}

std::uint32_t get_u32(std::istream& in) {
  char buf[4];
  if (!in.read(buf, 4)) throw ParseError("corrupt model file: truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  }
  return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

std::string get_string(std::istream& in) {
  const auto len = get_u32(in);
  if (len > (1u << 20)) throw ParseError("corrupt model file: oversized string");
  std::string s(len, '\0');
  if (len && !in.read(s.data(), len)) throw ParseError("corrupt model file: truncated");
  return s;
}

} // namespace

void save_model(const ProbabilisticModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file: " + path.string());
  out.write(kMagic, 4);
  out.put(static_cast<char>(kVersion));

  put_u32(out, static_cast<std::uint32_t>(model.class_labels.size()));
  for (const int label : model.class_labels) {
    put_u32(out, static_cast<std::uint32_t>(label));
  }
  put_u32(out, static_cast<std::uint32_t>(model.feature_names.size()));
  for (const auto& name : model.feature_names) put_string(out, name);
  for (const double v : model.scaler.means) put_f64(out, v);
  for (const double v : model.scaler.stddevs) put_f64(out, v);
  for (const double v : model.weights) put_f64(out, v);
  for (const double v : model.biases) put_f64(out, v);
  put_f64(out, model.hyper.l2);
  put_u32(out, static_cast<std::uint32_t>(model.hyper.max_iter));
  put_f64(out, model.hyper.tol);
  put_u64(out, model.seed);
  if (!out) throw Error("failed writing model file: " + path.string());
}

ProbabilisticModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model file: " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw ParseError("corrupt model file: bad magic");
  }
  const int version = in.get();
  if (version == std::istream::traits_type::eof()) {
    throw ParseError("corrupt model file: truncated");
  }
  if (version != kVersion) {
    throw ParseError("model file version mismatch: got " + std::to_string(version) +
                     ", expected " + std::to_string(kVersion));
  }

  ProbabilisticModel model;
  const auto num_classes = get_u32(in);
  if (num_classes < 2 || num_classes > (1u << 16)) {
    throw ParseError("corrupt model file: implausible class count");
  }
  model.class_labels.resize(num_classes);
  for (auto& label : model.class_labels) label = static_cast<int>(get_u32(in));
  const auto arity = get_u32(in);
  if (arity == 0 || arity > (1u << 20)) {
    throw ParseError("corrupt model file: implausible feature count");
  }
  model.feature_names.resize(arity);
  for (auto& name : model.feature_names) name = get_string(in);
  model.scaler.means.resize(arity);
  for (auto& v : model.scaler.means) v = get_f64(in);
  model.scaler.stddevs.resize(arity);
  for (auto& v : model.scaler.stddevs) v = get_f64(in);
  model.weights.resize(static_cast<std::size_t>(num_classes) * arity);
  for (auto& v : model.weights) v = get_f64(in);
  model.biases.resize(num_classes);
  for (auto& v : model.biases) v = get_f64(in);
  model.hyper.l2 = get_f64(in);
  model.hyper.max_iter = static_cast<int>(get_u32(in));
  model.hyper.tol = get_f64(in);
  model.seed = get_u64(in);
  return model;
}

} // namespace readability
