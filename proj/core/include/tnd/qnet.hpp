#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tnd/design_mdp.hpp"
#include "tnd/features.hpp"
#include "tnd/rng.hpp"

namespace tnd {

struct QNetConfig {
  int feature_dim = feature_dim_for(3);
  int node_dim = 32;      // n
  int edge_dim = 16;      // m
  int message_dim = 32;   // n'
  int rounds = 3;         // T
  double learning_rate = 1e-3;
  double gamma = 0.95;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  int epsilon_decay_steps = 200;

  /// Linearly annealed exploration rate after `step` training actions.
  double epsilon(long step) const;

  friend bool operator==(const QNetConfig&, const QNetConfig&) = default;
};

/// Throws ConfigurationError on non-positive sizes or gamma outside [0, 1).
void validate(const QNetConfig& config);

/// Affine map y = weight * x + bias.
struct Dense {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  friend bool operator==(const Dense& a, const Dense& b) {
    return a.weight.rows() == b.weight.rows() && a.weight.cols() == b.weight.cols() &&
           a.bias.size() == b.bias.size() && a.weight == b.weight && a.bias == b.bias;
  }
};

/// Learnable weights of the message-passing Q-function.
///
///   node embedding   mu0_b   = relu(embed_node [x_b])
///   edge embedding   w_ub    = relu(embed_edge [x_u; x_b])
///   message, round t m_b     = relu(message[t] [mu_b; mean_u mu_u; mean_u w_ub])
///   update, round t  mu_b'   = relu(update[t] [mu_b; m_b])
///   readout          Q(b, l) = readout [mu_b; mean_{u in l} mu_u]
///
/// Neighbourhood means are zero for isolated stops. Edge embeddings are
/// computed once and reused in every round.
struct QNetworkParams {
  QNetConfig config;
  Dense embed_node;
  Dense embed_edge;
  std::vector<Dense> message;
  std::vector<Dense> update;
  Dense readout;

  static QNetworkParams zeros(const QNetConfig& config);
  /// Glorot-uniform weights, zero biases.
  static QNetworkParams random(const QNetConfig& config, Rng& rng);

  /// Visits every tensor (weights then bias of each layer, fixed order).
  template <typename Self, typename Fn>
  static void visit(Self& self, Fn&& fn) {
    auto layer = [&](auto& d, const std::string& name) {
      fn(name + ".weight", d.weight);
      fn(name + ".bias", d.bias);
    };
    layer(self.embed_node, "embed_node");
    layer(self.embed_edge, "embed_edge");
    for (std::size_t t = 0; t < self.message.size(); ++t) layer(self.message[t], "message." + std::to_string(t));
    for (std::size_t t = 0; t < self.update.size(); ++t) layer(self.update[t], "update." + std::to_string(t));
    layer(self.readout, "readout");
  }
  template <typename Fn>
  void for_each_tensor(Fn&& fn) { visit(*this, fn); }
  template <typename Fn>
  void for_each_tensor(Fn&& fn) const { visit(*this, fn); }

  std::size_t num_parameters() const;

  friend bool operator==(const QNetworkParams&, const QNetworkParams&) = default;
};

using QGradients = QNetworkParams;

/// Q-values of the admissible actions of input.state, aligned with
/// enumerate_actions(input.state).
struct QValues {
  std::vector<Action> actions;
  Eigen::VectorXd values;

  /// Index of the largest value; ties go to the lowest index. -1 if empty.
  int argmax() const;
  double max() const;
};

/// Intermediate activations kept for backpropagation.
struct ForwardTrace {
  Eigen::MatrixXd node_pre;            // n x n_b
  std::vector<int> edge_src, edge_dst; // edge e carries u = src into b = dst
  Eigen::MatrixXd edge_in;             // 2d x E
  Eigen::MatrixXd edge_pre;            // m x E
  Eigen::MatrixXd edge_mean;           // m x n_b
  std::vector<Eigen::MatrixXd> mu;     // T+1 of n x n_b
  std::vector<Eigen::MatrixXd> msg_in, msg_pre, upd_in, upd_pre;
  Eigen::MatrixXd line_mean;           // n x k
  std::vector<int> line_size;
};

QValues forward(const QNetworkParams& params, const GraphInput& input, ForwardTrace* trace = nullptr);

/// Gradient of Q(S, action) with respect to every parameter.
QGradients q_value_gradient(const QNetworkParams& params, const GraphInput& input,
                            const Action& action);

struct Transition {
  GraphInput state;
  Action action;
  double reward = 0.0;
  GraphInput next;
};

struct LossResult {
  double loss = 0.0;
  double q_value = 0.0;
  double target = 0.0;
  QGradients gradients;
};

/// gamma * max_q_next + reward: the one-step Q-learning target.
double q_learning_target(double max_q_next, double reward, double gamma);

/// (q_learning_target(max_q_next, reward, gamma) - q_sa)^2.
double q_learning_loss(double q_sa, double max_q_next, double reward, double gamma);

/// One-step Q-learning: (gamma * max_a' Q(S', a') + r - Q(S, a))^2.
/// The target is held constant (semi-gradient). A successor without
/// admissible actions contributes max Q = 0.
LossResult loss_and_grads(const QNetworkParams& params, const Transition& transition, double gamma);

/// Squared error against a fixed target; used by gradient checks.
double squared_error(const QNetworkParams& params, const GraphInput& input, const Action& action,
                     double target);

/// theta <- theta - learning_rate * grad for every tensor.
QNetworkParams sgd_step(const QNetworkParams& params, const QGradients& gradients, double learning_rate);

void save_checkpoint(const QNetworkParams& params, const std::filesystem::path& path);
/// If `expected` is given, its sizes (feature_dim, n, m, n', T) must match.
QNetworkParams load_checkpoint(const std::filesystem::path& path, const QNetConfig* expected = nullptr);

std::string checkpoint_to_json(const QNetworkParams& params);
QNetworkParams checkpoint_from_json(const std::string& text, const QNetConfig* expected = nullptr);

}  // namespace tnd
