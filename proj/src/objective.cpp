#include "laprep/objective.hpp"

#include "laprep/error.hpp"
#include "laprep/kernels.hpp"

namespace laprep::repr {
namespace {

void require_same_shape(const RowMatrix& a, const RowMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorCode::ShapeMismatch, "embedding batches differ in shape");
  }
  if (a.rows() == 0) fail(ErrorCode::ShapeMismatch, "empty embedding batch");
}

}  // namespace

double attractive_term(const RowMatrix& pu, const RowMatrix& pv) {
  require_same_shape(pu, pv);
  const auto d = static_cast<std::size_t>(pu.cols());
  const auto& k = simd::active_kernels();
  std::vector<double> diff(d);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < pu.rows(); ++i) {
    const double* a = pu.data() + i * pu.cols();
    const double* b = pv.data() + i * pv.cols();
    for (std::size_t j = 0; j < d; ++j) diff[j] = a[j] - b[j];
    sum += 0.5 * k.dot(diff.data(), diff.data(), d);
  }
  return sum / static_cast<double>(pu.rows());
}

double repulsive_term(const RowMatrix& pu, const RowMatrix& pw, double c) {
  require_same_shape(pu, pw);
  const auto d = static_cast<std::size_t>(pu.cols());
  const auto& k = simd::active_kernels();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < pu.rows(); ++i) {
    const double* a = pu.data() + i * pu.cols();
    const double* b = pw.data() + i * pw.cols();
    const double ab = k.dot(a, b, d);
    sum += ab * ab - c * k.dot(a, a, d) - c * k.dot(b, b, d) + c * c * static_cast<double>(d);
  }
  return sum / static_cast<double>(pu.rows());
}

LossTerms loss_with_gradients(const RowMatrix& pu, const RowMatrix& pv, const RowMatrix& pu_neg,
                              const RowMatrix& pw, double beta, double c,
                              EmbeddingGradients* grads) {
  require_same_shape(pu, pv);
  require_same_shape(pu_neg, pw);
  if (pu.cols() != pu_neg.cols()) fail(ErrorCode::ShapeMismatch, "embedding widths differ");

  LossTerms terms;
  terms.attractive = attractive_term(pu, pv);
  terms.repulsive = repulsive_term(pu_neg, pw, c);
  terms.total = terms.attractive + beta * terms.repulsive;
  if (grads == nullptr) return terms;

  const auto d = static_cast<std::size_t>(pu.cols());
  const auto& k = simd::active_kernels();
  const double inv_pos = 1.0 / static_cast<double>(pu.rows());
  const double inv_neg = 1.0 / static_cast<double>(pu_neg.rows());

  grads->du = (pu - pv) * inv_pos;
  grads->dv = -grads->du;

  grads->du_neg.resize(pu_neg.rows(), pu_neg.cols());
  grads->dw.resize(pw.rows(), pw.cols());
  for (Eigen::Index i = 0; i < pu_neg.rows(); ++i) {
    const double* a = pu_neg.data() + i * pu_neg.cols();
    const double* b = pw.data() + i * pw.cols();
    double* ga = grads->du_neg.data() + i * pu_neg.cols();
    double* gb = grads->dw.data() + i * pw.cols();
    const double ab = k.dot(a, b, d);
    const double scale = beta * inv_neg;
    for (std::size_t j = 0; j < d; ++j) {
      ga[j] = scale * (2.0 * ab * b[j] - 2.0 * c * a[j]);
      gb[j] = scale * (2.0 * ab * a[j] - 2.0 * c * b[j]);
    }
  }
  return terms;
}

}  // namespace laprep::repr
