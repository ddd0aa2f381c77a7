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

#ifndef DPFL_MODELS_HPP
#define DPFL_MODELS_HPP

#include "dpfl/dataset.hpp"
#include "dpfl/types.hpp"

namespace dpfl {

enum class ModelKind { kQuadratic, kMlr, kMlp };

/// Differentiable loss family used by the simulator. All parameters live in a
/// single flattened vector so clipping and perturbation treat the whole model
/// uniformly.
///
///  - quadratic: F(w) = (1/b) ||X w - y||^2 (mean squared residual)
///  - mlr: multiclass logistic regression, softmax cross-entropy
///  - mlp: one ReLU hidden layer + softmax output, cross-entropy
///
/// loss and grad are pure and deterministic; evaluation across clients may
/// run concurrently.
class LossModel {
 public:
  static LossModel quadratic();
  static LossModel mlr(int classes);
  static LossModel mlp(int hidden, int classes);

  ModelKind kind() const { return kind_; }
  int classes() const { return classes_; }
  int hidden() const { return hidden_; }
  bool is_classifier() const { return kind_ != ModelKind::kQuadratic; }

  /// Flattened parameter count for data of width `feature_dim`.
  /// MLR layout: W (classes x d, row-major).
  /// MLP layout: [W1 (hidden x d), b1, W2 (classes x hidden), b2].
  int param_dim(int feature_dim) const;

  double loss(const ModelVector& w, const ClientDataset& data) const;
  ModelVector grad(const ModelVector& w, const ClientDataset& data) const;

  /// Fraction of argmax-correct predictions; classifiers only.
  double accuracy(const ModelVector& w, const ClientDataset& data) const;

 private:
  LossModel(ModelKind kind, int hidden, int classes)
      : kind_(kind), hidden_(hidden), classes_(classes) {}

  ModelKind kind_;
  int hidden_ = 0;
  int classes_ = 0;
};

/// Max over coordinates of the relative error between the analytic gradient
/// and the central difference (loss(w+h e_i) - loss(w-h e_i)) / (2h), with
/// per-coordinate denominator max(1, |analytic|, |difference|).
double finite_diff_check(const LossModel& model, const ModelVector& w, const ClientDataset& data,
                         double step);

}  // namespace dpfl

#endif  // DPFL_MODELS_HPP
