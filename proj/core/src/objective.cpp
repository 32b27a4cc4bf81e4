#include "gps/objective.hpp"

#include "gps/error.hpp"

namespace gps {

Tensor similarity_loss(const Tensor& target, const Tensor& online) {
  if (!target.defined() || !online.defined()) {
    throw StateError("similarity_loss: undefined input");
  }
  if (target.rows() != online.rows() || target.cols() != online.cols()) {
    throw DimensionError("similarity_loss: shape mismatch");
  }
  const int batch = target.rows();
  std::vector<Tensor> distances;
  distances.reserve(static_cast<std::size_t>(batch));
  for (int b = 0; b < batch; ++b) {
    Tensor c = cosine_sim(row(target, b), row(online, b));
    distances.push_back(add_scalar(mul_scalar(c, -1.0), 1.0));
  }
  return mean_all(concat_rows(distances));
}

Tensor similarity_distribution(const Tensor& h, const Tensor& target, double tau) {
  if (tau <= 0.0) throw ConfigError("similarity_distribution: tau must be positive");
  if (h.rows() != 1) throw DimensionError("similarity_distribution: h must be 1 x d");
  if (h.cols() != target.cols()) {
    throw DimensionError("similarity_distribution: width mismatch");
  }
  const int batch = target.rows();
  if (batch < 2) throw DimensionError("similarity_distribution: batch must have >= 2 rows");
  std::vector<Tensor> sims;
  sims.reserve(static_cast<std::size_t>(batch));
  for (int b = 0; b < batch; ++b) sims.push_back(cosine_sim(h, row(target, b)));
  Tensor logits = mul_scalar(transpose(concat_rows(sims)), 1.0 / tau);
  return row_softmax(logits);
}

Tensor consistency_loss(const Tensor& mu, const Tensor& nu) {
  if (!mu.defined() || !nu.defined()) throw StateError("consistency_loss: undefined input");
  if (mu.rows() != nu.rows() || mu.cols() != nu.cols()) {
    throw DimensionError("consistency_loss: shape mismatch");
  }
  for (const Tensor* t : {&mu, &nu}) {
    for (double v : t->values()) {
      if (v <= 0.0) throw NumericError("consistency_loss: non-positive probability entry");
    }
  }
  Tensor forward_kl = row_sum(mul(mu, sub(log_op(mu), log_op(nu))));
  Tensor reverse_kl = row_sum(mul(nu, sub(log_op(nu), log_op(mu))));
  return mul_scalar(mean_all(add(forward_kl, reverse_kl)), 0.5);
}

ObjectiveTerms batch_objective(const BatchViews& views, bool use_sl, bool use_cl) {
  if (!views.target.defined()) throw StateError("batch_objective: missing target rows");
  const int batch = views.target.rows();
  if (batch < 2) throw DimensionError("batch_objective: batch must have >= 2 rows");

  ObjectiveTerms terms;
  if (use_sl) {
    terms.l_sl = similarity_loss(views.target, views.weak);
  }
  if (use_cl) {
    std::vector<Tensor> mu_rows, nu_rows;
    mu_rows.reserve(static_cast<std::size_t>(batch));
    nu_rows.reserve(static_cast<std::size_t>(batch));
    for (int b = 0; b < batch; ++b) {
      mu_rows.push_back(similarity_distribution(row(views.strong, b), views.target, views.tau));
      nu_rows.push_back(similarity_distribution(row(views.weak, b), views.target, views.tau));
    }
    terms.l_cl = consistency_loss(concat_rows(mu_rows), concat_rows(nu_rows));
  }
  return terms;
}

}  // namespace gps
