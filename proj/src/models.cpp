//
// Copyright 2026 The dpfl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dpfl/models.hpp"

#include <algorithm>
#include <cmath>

namespace dpfl {

namespace {

using RowMajorMap = Eigen::Map<
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMajorMutMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

void check_classification_data(const ClientDataset& data) {
  if (!data.has_labels()) throw ShapeError("classifier requires labeled data");
}

// Row-wise softmax of logits, stabilized by the row max.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double m = p.row(i).maxCoeff();
    p.row(i) = (p.row(i).array() - m).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

double cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& labels) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    total += lse - logits(i, labels[static_cast<std::size_t>(i)]);
  }
  return total / static_cast<double>(logits.rows());
}

// dLoss/dLogits for mean cross-entropy: (softmax - onehot)/b.
Eigen::MatrixXd ce_logit_grad(const Eigen::MatrixXd& logits, const std::vector<int>& labels) {
  Eigen::MatrixXd g = softmax_rows(logits);
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    g(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
  }
  g /= static_cast<double>(g.rows());
  return g;
}

struct MlpViews {
  RowMajorMap w1;
  Eigen::Map<const Eigen::VectorXd> b1;
  RowMajorMap w2;
  Eigen::Map<const Eigen::VectorXd> b2;
};

MlpViews mlp_views(const ModelVector& w, int d, int h, int k) {
  const double* p = w.data();
  return MlpViews{RowMajorMap(p, h, d), Eigen::Map<const Eigen::VectorXd>(p + h * d, h),
                  RowMajorMap(p + h * d + h, k, h),
                  Eigen::Map<const Eigen::VectorXd>(p + h * d + h + k * h, k)};
}

}  // namespace

LossModel LossModel::quadratic() { return LossModel(ModelKind::kQuadratic, 0, 0); }

LossModel LossModel::mlr(int classes) {
  if (classes < 2) throw DomainError("mlr: need at least two classes");
  return LossModel(ModelKind::kMlr, 0, classes);
}

LossModel LossModel::mlp(int hidden, int classes) {
  if (hidden < 1) throw DomainError("mlp: need at least one hidden unit");
  if (classes < 2) throw DomainError("mlp: need at least two classes");
  return LossModel(ModelKind::kMlp, hidden, classes);
}

int LossModel::param_dim(int feature_dim) const {
  if (feature_dim < 1) throw ShapeError("param_dim: feature dimension must be >= 1");
  switch (kind_) {
    case ModelKind::kQuadratic:
      return feature_dim;
    case ModelKind::kMlr:
      return classes_ * feature_dim;
    case ModelKind::kMlp:
      return hidden_ * feature_dim + hidden_ + classes_ * hidden_ + classes_;
  }
  return 0;
}

double LossModel::loss(const ModelVector& w, const ClientDataset& data) const {
  if (w.size() != param_dim(data.dim())) throw ShapeError("loss: parameter/data dimension mismatch");
  const auto b = static_cast<double>(data.size());

  switch (kind_) {
    case ModelKind::kQuadratic: {
      if (!data.has_targets()) throw ShapeError("quadratic loss requires real targets");
      return (data.features * w - data.targets).squaredNorm() / b;
    }
    case ModelKind::kMlr: {
      check_classification_data(data);
      RowMajorMap weights(w.data(), classes_, data.dim());
      return cross_entropy(data.features * weights.transpose(), data.labels);
    }
    case ModelKind::kMlp: {
      check_classification_data(data);
      const MlpViews v = mlp_views(w, data.dim(), hidden_, classes_);
      Eigen::MatrixXd a = (data.features * v.w1.transpose()).rowwise() + v.b1.transpose();
      Eigen::MatrixXd hact = a.cwiseMax(0.0);
      Eigen::MatrixXd logits = (hact * v.w2.transpose()).rowwise() + v.b2.transpose();
      return cross_entropy(logits, data.labels);
    }
  }
  return 0.0;
}

ModelVector LossModel::grad(const ModelVector& w, const ClientDataset& data) const {
  if (w.size() != param_dim(data.dim())) throw ShapeError("grad: parameter/data dimension mismatch");
  const auto b = static_cast<double>(data.size());

  switch (kind_) {
    case ModelKind::kQuadratic: {
      if (!data.has_targets()) throw ShapeError("quadratic grad requires real targets");
      return (2.0 / b) * (data.features.transpose() * (data.features * w - data.targets));
    }
    case ModelKind::kMlr: {
      check_classification_data(data);
      RowMajorMap weights(w.data(), classes_, data.dim());
      Eigen::MatrixXd dlogits = ce_logit_grad(data.features * weights.transpose(), data.labels);
      ModelVector g(w.size());
      RowMajorMutMap(g.data(), classes_, data.dim()) = dlogits.transpose() * data.features;
      return g;
    }
    case ModelKind::kMlp: {
      check_classification_data(data);
      const int d = data.dim();
      const MlpViews v = mlp_views(w, d, hidden_, classes_);
      Eigen::MatrixXd a = (data.features * v.w1.transpose()).rowwise() + v.b1.transpose();
      Eigen::MatrixXd hact = a.cwiseMax(0.0);
      Eigen::MatrixXd logits = (hact * v.w2.transpose()).rowwise() + v.b2.transpose();

      Eigen::MatrixXd dlogits = ce_logit_grad(logits, data.labels);
      Eigen::MatrixXd dh = dlogits * v.w2;
      Eigen::MatrixXd da = (a.array() > 0.0).select(dh, 0.0);

      ModelVector g(w.size());
      double* p = g.data();
      RowMajorMutMap(p, hidden_, d) = da.transpose() * data.features;
      Eigen::Map<Eigen::VectorXd>(p + hidden_ * d, hidden_) = da.colwise().sum();
      RowMajorMutMap(p + hidden_ * d + hidden_, classes_, hidden_) = dlogits.transpose() * hact;
      Eigen::Map<Eigen::VectorXd>(p + hidden_ * d + hidden_ + classes_ * hidden_, classes_) =
          dlogits.colwise().sum();
      return g;
    }
  }
  return ModelVector();
}

double LossModel::accuracy(const ModelVector& w, const ClientDataset& data) const {
  if (!is_classifier()) {
    throw UnsupportedMetricError("accuracy: not defined for quadratic models");
  }
  if (w.size() != param_dim(data.dim())) {
    throw ShapeError("accuracy: parameter/data dimension mismatch");
  }
  check_classification_data(data);

  Eigen::MatrixXd logits;
  if (kind_ == ModelKind::kMlr) {
    RowMajorMap weights(w.data(), classes_, data.dim());
    logits = data.features * weights.transpose();
  } else {
    const MlpViews v = mlp_views(w, data.dim(), hidden_, classes_);
    Eigen::MatrixXd a = (data.features * v.w1.transpose()).rowwise() + v.b1.transpose();
    logits = (a.cwiseMax(0.0) * v.w2.transpose()).rowwise() + v.b2.transpose();
  }

  int correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    logits.row(i).maxCoeff(&best);
    if (static_cast<int>(best) == data.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

double finite_diff_check(const LossModel& model, const ModelVector& w, const ClientDataset& data,
                         double step) {
  if (!(step > 0)) throw DomainError("finite_diff_check: step must be > 0");
  const ModelVector g = model.grad(w, data);
  ModelVector probe = w;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    probe[i] = w[i] + step;
    const double up = model.loss(probe, data);
    probe[i] = w[i] - step;
    const double down = model.loss(probe, data);
    probe[i] = w[i];
    const double fd = (up - down) / (2.0 * step);
    const double denom = std::max({1.0, std::abs(g[i]), std::abs(fd)});
    worst = std::max(worst, std::abs(g[i] - fd) / denom);
  }
  return worst;
}

}  // namespace dpfl
