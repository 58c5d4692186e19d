#pragma once

#include <span>
#include <vector>

#include "repspace/matrix.hpp"
#include "repspace/queue.hpp"

namespace repspace {

/// Loss value plus its gradient w.r.t. the similarity vector
/// [s_pos, s_neg_0, ..., s_neg_{K-1}] (negatives in queue order, oldest
/// first).
struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;
};

// Similarity-level forms. These take raw similarities and do no unit-norm
// checks; the vector-level forms below validate and compute cosines.

/// -log softmax_0(s / tau) over [s_pos, s_neg...].
LossResult info_nce_from_similarities(double s_pos, std::span<const double> s_neg, double tau);
/// -s_pos + lambda * sum(s_neg). The large-temperature limit.
LossResult simple_loss_from_similarities(double s_pos, std::span<const double> s_neg, double lambda);
/// max(max(s_neg) - s_pos, 0). The small-temperature limit. The subgradient
/// picks the lowest-index maximal negative.
LossResult triplet_loss_from_similarities(double s_pos, std::span<const double> s_neg);
/// Cross-entropy H(p_teacher, p_student) with p = softmax(sims / tau) over
/// the same targets. Gradient is w.r.t. the student similarities only.
LossResult seed_distill_from_similarities(std::span<const double> student_sims,
                                          std::span<const double> teacher_sims, double tau_student,
                                          double tau_teacher);

LossResult info_nce(std::span<const double> q, std::span<const double> k_pos, const NegativeQueue& negatives,
                    double tau);
LossResult simple_loss(std::span<const double> q, std::span<const double> k_pos, const NegativeQueue& negatives,
                       double lambda);
LossResult triplet_loss(std::span<const double> q, std::span<const double> k_pos, const NegativeQueue& negatives);

/// Targets are the teacher anchor followed by the queue entries, so the
/// gradient has length queue.size() + 1 with the anchor first.
LossResult seed_distill_loss(std::span<const double> student_q, std::span<const double> teacher_q,
                             const NegativeQueue& queue, double tau_student, double tau_teacher);

/// Batch forms used by the trainer: mean loss over rows and the gradient of
/// that mean w.r.t. each row of the (unit) query matrix.
struct BatchLoss {
  double mean_loss = 0.0;
  Matrix query_grad;
  double accuracy = 0.0;  // fraction of rows whose positive outranks every negative
};

BatchLoss info_nce_batch(const Matrix& queries, const Matrix& keys, const NegativeQueue& negatives, double tau);
BatchLoss seed_distill_batch(const Matrix& student, const Matrix& teacher, const NegativeQueue& queue,
                             double tau_student, double tau_teacher);

/// Entropy of softmax(sims / tau).
double softmax_entropy(std::span<const double> sims, double tau);

}  // namespace repspace
