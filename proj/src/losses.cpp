#include "repspace/losses.hpp"

#include <algorithm>
#include <cmath>

#include "repspace/embeddings.hpp"
#include "repspace/error.hpp"

namespace repspace {

namespace {

void check_tau(double tau, const char* who) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorKind::invalid_argument, std::string(who) + ": temperature must be > 0");
  }
}

void check_unit(std::span<const double> v, const char* who) {
  const double norm = std::sqrt(squared_norm(v));
  if (!(std::abs(norm - 1.0) <= kUnitNormTolerance)) {
    throw Error(ErrorKind::norm_violation, std::string(who) + ": input is not unit-norm");
  }
}

void check_queue(const NegativeQueue& q, std::size_t dim, const char* who) {
  if (q.empty()) throw Error(ErrorKind::invalid_argument, std::string(who) + ": queue is empty");
  if (q.dim() != dim) throw Error(ErrorKind::dimension_mismatch, std::string(who) + ": queue width mismatch");
}

// log-softmax of x / tau into `out` (probabilities); returns log-partition.
double softmax(std::span<const double> x, double tau, std::vector<double>& p) {
  double m = -INFINITY;
  for (double v : x) m = std::max(m, v / tau);
  double z = 0.0;
  p.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    p[i] = std::exp(x[i] / tau - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return m + std::log(z);
}

std::vector<double> similarities(std::span<const double> q, std::span<const double> k_pos,
                                 const NegativeQueue& negatives) {
  std::vector<double> s(negatives.size() + 1);
  s[0] = dot(q, k_pos);
  for (std::size_t i = 0; i < negatives.size(); ++i) s[i + 1] = dot(q, negatives.at(i));
  return s;
}

void check_pair(std::span<const double> q, std::span<const double> k, const NegativeQueue& negatives,
                const char* who) {
  if (q.size() != k.size()) throw Error(ErrorKind::dimension_mismatch, std::string(who) + ": q/k width mismatch");
  check_unit(q, who);
  check_unit(k, who);
  check_queue(negatives, q.size(), who);
}

}  // namespace

LossResult info_nce_from_similarities(double s_pos, std::span<const double> s_neg, double tau) {
  check_tau(tau, "info_nce");
  std::vector<double> s(s_neg.size() + 1);
  s[0] = s_pos;
  std::copy(s_neg.begin(), s_neg.end(), s.begin() + 1);
  LossResult r;
  const double log_z = softmax(s, tau, r.grad);
  r.loss = log_z - s_pos / tau;
  // dL/ds_0 = (p_0 - 1)/tau, dL/ds_k = p_k/tau
  r.grad[0] -= 1.0;
  for (double& g : r.grad) g /= tau;
  return r;
}

LossResult simple_loss_from_similarities(double s_pos, std::span<const double> s_neg, double lambda) {
  LossResult r;
  r.loss = -s_pos;
  r.grad.assign(s_neg.size() + 1, lambda);
  r.grad[0] = -1.0;
  double neg = 0.0;
  for (double s : s_neg) neg += s;
  r.loss += lambda * neg;
  return r;
}

LossResult triplet_loss_from_similarities(double s_pos, std::span<const double> s_neg) {
  if (s_neg.empty()) throw Error(ErrorKind::invalid_argument, "triplet_loss: no negatives");
  const auto it = std::max_element(s_neg.begin(), s_neg.end());
  LossResult r;
  r.grad.assign(s_neg.size() + 1, 0.0);
  const double margin = *it - s_pos;
  if (margin > 0.0) {
    r.loss = margin;
    r.grad[0] = -1.0;
    r.grad[1 + static_cast<std::size_t>(it - s_neg.begin())] = 1.0;
  }
  return r;
}

LossResult seed_distill_from_similarities(std::span<const double> student_sims, std::span<const double> teacher_sims,
                                          double tau_student, double tau_teacher) {
  check_tau(tau_student, "seed_distill_loss");
  check_tau(tau_teacher, "seed_distill_loss");
  if (student_sims.size() != teacher_sims.size() || student_sims.empty()) {
    throw Error(ErrorKind::dimension_mismatch, "seed_distill_loss: similarity vectors differ in length");
  }
  std::vector<double> pt;
  softmax(teacher_sims, tau_teacher, pt);
  LossResult r;
  const double log_z = softmax(student_sims, tau_student, r.grad);
  // -sum p_t log p_s, log p_s_j = s_j/tau - log Z
  double loss = 0.0;
  for (std::size_t j = 0; j < pt.size(); ++j) loss -= pt[j] * (student_sims[j] / tau_student - log_z);
  r.loss = loss;
  for (std::size_t j = 0; j < pt.size(); ++j) r.grad[j] = (r.grad[j] - pt[j]) / tau_student;
  return r;
}

double softmax_entropy(std::span<const double> sims, double tau) {
  std::vector<double> p;
  const double log_z = softmax(sims, tau, p);
  double h = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) h -= p[j] * (sims[j] / tau - log_z);
  return h;
}

LossResult info_nce(std::span<const double> q, std::span<const double> k_pos, const NegativeQueue& negatives,
                    double tau) {
  check_tau(tau, "info_nce");
  check_pair(q, k_pos, negatives, "info_nce");
  const auto s = similarities(q, k_pos, negatives);
  return info_nce_from_similarities(s[0], std::span(s).subspan(1), tau);
}

LossResult simple_loss(std::span<const double> q, std::span<const double> k_pos, const NegativeQueue& negatives,
                       double lambda) {
  check_pair(q, k_pos, negatives, "simple_loss");
  const auto s = similarities(q, k_pos, negatives);
  return simple_loss_from_similarities(s[0], std::span(s).subspan(1), lambda);
}

LossResult triplet_loss(std::span<const double> q, std::span<const double> k_pos, const NegativeQueue& negatives) {
  check_pair(q, k_pos, negatives, "triplet_loss");
  const auto s = similarities(q, k_pos, negatives);
  return triplet_loss_from_similarities(s[0], std::span(s).subspan(1));
}

LossResult seed_distill_loss(std::span<const double> student_q, std::span<const double> teacher_q,
                             const NegativeQueue& queue, double tau_student, double tau_teacher) {
  check_tau(tau_student, "seed_distill_loss");
  check_tau(tau_teacher, "seed_distill_loss");
  check_pair(student_q, teacher_q, queue, "seed_distill_loss");
  const auto student = similarities(student_q, teacher_q, queue);
  const auto teacher = similarities(teacher_q, teacher_q, queue);
  return seed_distill_from_similarities(student, teacher, tau_student, tau_teacher);
}

BatchLoss info_nce_batch(const Matrix& queries, const Matrix& keys, const NegativeQueue& negatives, double tau) {
  check_tau(tau, "info_nce");
  if (queries.rows() != keys.rows() || queries.cols() != keys.cols() || queries.rows() == 0) {
    throw Error(ErrorKind::dimension_mismatch, "info_nce_batch: query/key shape mismatch");
  }
  check_queue(negatives, queries.cols(), "info_nce_batch");
  const Matrix bank = negatives.snapshot();
  const Matrix s_neg = matmul_abt(queries, bank);
  const double inv_b = 1.0 / static_cast<double>(queries.rows());
  BatchLoss out;
  out.query_grad = Matrix(queries.rows(), queries.cols());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    const double s_pos = dot(queries.row(i), keys.row(i));
    const auto negs = s_neg.row(i);
    const LossResult r = info_nce_from_similarities(s_pos, negs, tau);
    out.mean_loss += r.loss * inv_b;
    correct += s_pos > *std::max_element(negs.begin(), negs.end());
    auto g = out.query_grad.row(i);
    auto k = keys.row(i);
    for (std::size_t c = 0; c < g.size(); ++c) g[c] = r.grad[0] * k[c];
    for (std::size_t j = 0; j < bank.rows(); ++j) {
      const double w = r.grad[j + 1];
      auto n = bank.row(j);
      for (std::size_t c = 0; c < g.size(); ++c) g[c] += w * n[c];
    }
    for (double& x : g) x *= inv_b;
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(queries.rows());
  return out;
}

BatchLoss seed_distill_batch(const Matrix& student, const Matrix& teacher, const NegativeQueue& queue,
                             double tau_student, double tau_teacher) {
  if (student.rows() != teacher.rows() || student.cols() != teacher.cols() || student.rows() == 0) {
    throw Error(ErrorKind::dimension_mismatch, "seed_distill_batch: student/teacher shape mismatch");
  }
  check_queue(queue, student.cols(), "seed_distill_batch");
  const Matrix bank = queue.snapshot();
  const Matrix s_neg = matmul_abt(student, bank);
  const Matrix t_neg = matmul_abt(teacher, bank);
  const double inv_b = 1.0 / static_cast<double>(student.rows());
  BatchLoss out;
  out.query_grad = Matrix(student.rows(), student.cols());
  std::vector<double> ss(bank.rows() + 1), ts(bank.rows() + 1);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < student.rows(); ++i) {
    ss[0] = dot(student.row(i), teacher.row(i));
    ts[0] = dot(teacher.row(i), teacher.row(i));
    std::copy(s_neg.row(i).begin(), s_neg.row(i).end(), ss.begin() + 1);
    std::copy(t_neg.row(i).begin(), t_neg.row(i).end(), ts.begin() + 1);
    const LossResult r = seed_distill_from_similarities(ss, ts, tau_student, tau_teacher);
    out.mean_loss += r.loss * inv_b;
    agree += std::max_element(ss.begin(), ss.end()) == ss.begin();
    auto g = out.query_grad.row(i);
    auto t = teacher.row(i);
    for (std::size_t c = 0; c < g.size(); ++c) g[c] = r.grad[0] * t[c];
    for (std::size_t j = 0; j < bank.rows(); ++j) {
      const double w = r.grad[j + 1];
      auto n = bank.row(j);
      for (std::size_t c = 0; c < g.size(); ++c) g[c] += w * n[c];
    }
    for (double& x : g) x *= inv_b;
  }
  out.accuracy = static_cast<double>(agree) / static_cast<double>(student.rows());
  return out;
}

}  // namespace repspace
