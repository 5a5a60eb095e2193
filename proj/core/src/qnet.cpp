#include "tnd/qnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json_fields.hpp"
#include "tnd/error.hpp"

namespace tnd {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double QNetConfig::epsilon(long step) const {
  if (epsilon_decay_steps <= 0 || step >= epsilon_decay_steps) return epsilon_end;
  const double frac = static_cast<double>(std::max(0L, step)) / epsilon_decay_steps;
  return epsilon_start + (epsilon_end - epsilon_start) * frac;
}

void validate(const QNetConfig& c) {
  if (c.feature_dim < 1 || c.node_dim < 1 || c.edge_dim < 1 || c.message_dim < 1 || c.rounds < 0)
    throw ConfigurationError("network dimensions must be positive");
  if (!(c.gamma >= 0.0 && c.gamma < 1.0)) throw ConfigurationError("gamma must be in [0, 1)");
  if (!(c.learning_rate >= 0.0)) throw ConfigurationError("learning_rate must be >= 0");
}

namespace {

Dense zero_dense(Index out, Index in) { return {MatrixXd::Zero(out, in), VectorXd::Zero(out)}; }

Dense glorot(Index out, Index in, Rng& rng) {
  Dense d = zero_dense(out, in);
  const double a = std::sqrt(6.0 / static_cast<double>(in + out));
  for (Index i = 0; i < out; ++i)
    for (Index j = 0; j < in; ++j) d.weight(i, j) = rng.uniform(-a, a);
  return d;
}

MatrixXd relu(const MatrixXd& x) { return x.cwiseMax(0.0); }

MatrixXd relu_mask(const MatrixXd& pre) {
  return (pre.array() > 0.0).cast<double>().matrix();
}

void apply_affine(const Dense& d, const MatrixXd& in, MatrixXd& out) {
  out.noalias() = d.weight * in;
  out.colwise() += d.bias;
}

void check_dims(const QNetworkParams& p, const GraphInput& in) {
  const auto& c = p.config;
  if (in.features.rows() != c.feature_dim)
    throw ConfigurationError("feature dimension " + std::to_string(in.features.rows()) +
                             " does not match network input " + std::to_string(c.feature_dim));
  if (in.features.cols() != static_cast<Index>(in.state.num_stops()) ||
      in.neighbors.size() != in.state.num_stops())
    throw ConfigurationError("graph input does not match its state");
  if (static_cast<int>(p.message.size()) != c.rounds || static_cast<int>(p.update.size()) != c.rounds)
    throw ConfigurationError("parameter rounds do not match configuration");
  if (p.embed_node.weight.rows() != c.node_dim || p.embed_node.weight.cols() != c.feature_dim ||
      p.embed_edge.weight.rows() != c.edge_dim || p.embed_edge.weight.cols() != 2 * c.feature_dim ||
      p.readout.weight.rows() != 1 || p.readout.weight.cols() != 2 * c.node_dim)
    throw ConfigurationError("parameter shapes do not match configuration");
  for (int t = 0; t < c.rounds; ++t) {
    const auto& m = p.message[static_cast<std::size_t>(t)].weight;
    const auto& u = p.update[static_cast<std::size_t>(t)].weight;
    if (m.rows() != c.message_dim || m.cols() != 2 * c.node_dim + c.edge_dim ||
        u.rows() != c.node_dim || u.cols() != c.node_dim + c.message_dim)
      throw ConfigurationError("round " + std::to_string(t) + " shapes do not match configuration");
  }
}

}  // namespace

QNetworkParams QNetworkParams::zeros(const QNetConfig& c) {
  validate(c);
  QNetworkParams p;
  p.config = c;
  p.embed_node = zero_dense(c.node_dim, c.feature_dim);
  p.embed_edge = zero_dense(c.edge_dim, 2 * c.feature_dim);
  for (int t = 0; t < c.rounds; ++t) {
    p.message.push_back(zero_dense(c.message_dim, 2 * c.node_dim + c.edge_dim));
    p.update.push_back(zero_dense(c.node_dim, c.node_dim + c.message_dim));
  }
  p.readout = zero_dense(1, 2 * c.node_dim);
  return p;
}

QNetworkParams QNetworkParams::random(const QNetConfig& c, Rng& rng) {
  validate(c);
  QNetworkParams p;
  p.config = c;
  p.embed_node = glorot(c.node_dim, c.feature_dim, rng);
  p.embed_edge = glorot(c.edge_dim, 2 * c.feature_dim, rng);
  for (int t = 0; t < c.rounds; ++t) {
    p.message.push_back(glorot(c.message_dim, 2 * c.node_dim + c.edge_dim, rng));
    p.update.push_back(glorot(c.node_dim, c.node_dim + c.message_dim, rng));
  }
  p.readout = glorot(1, 2 * c.node_dim, rng);
  return p;
}

std::size_t QNetworkParams::num_parameters() const {
  std::size_t total = 0;
  for_each_tensor([&](const std::string&, const auto& t) { total += static_cast<std::size_t>(t.size()); });
  return total;
}

int QValues::argmax() const {
  if (values.size() == 0) return -1;
  Index best = 0;
  for (Index i = 1; i < values.size(); ++i)
    if (values(i) > values(best)) best = i;
  return static_cast<int>(best);
}

double QValues::max() const {
  const int i = argmax();
  return i < 0 ? 0.0 : values(i);
}

QValues forward(const QNetworkParams& p, const GraphInput& in, ForwardTrace* trace) {
  check_dims(p, in);
  const auto& c = p.config;
  const Index nb = in.features.cols();
  const Index n = c.node_dim;
  const Index m = c.edge_dim;
  const Index d = c.feature_dim;

  ForwardTrace local;
  ForwardTrace& tr = trace ? *trace : local;

  apply_affine(p.embed_node, in.features, tr.node_pre);
  tr.mu.assign(1, relu(tr.node_pre));

  // Directed edge list: every (u -> b) with u in N(b).
  tr.edge_src.clear();
  tr.edge_dst.clear();
  for (Index b = 0; b < nb; ++b)
    for (int u : in.neighbors[static_cast<std::size_t>(b)]) {
      tr.edge_src.push_back(u);
      tr.edge_dst.push_back(static_cast<int>(b));
    }
  const auto edges = static_cast<Index>(tr.edge_src.size());
  tr.edge_in.resize(2 * d, edges);
  for (Index e = 0; e < edges; ++e) {
    tr.edge_in.col(e).head(d) = in.features.col(tr.edge_src[static_cast<std::size_t>(e)]);
    tr.edge_in.col(e).tail(d) = in.features.col(tr.edge_dst[static_cast<std::size_t>(e)]);
  }
  apply_affine(p.embed_edge, tr.edge_in, tr.edge_pre);
  const MatrixXd edge_w = relu(tr.edge_pre);
  tr.edge_mean = MatrixXd::Zero(m, nb);
  for (Index e = 0; e < edges; ++e) tr.edge_mean.col(tr.edge_dst[static_cast<std::size_t>(e)]) += edge_w.col(e);
  for (Index b = 0; b < nb; ++b) {
    const auto deg = in.neighbors[static_cast<std::size_t>(b)].size();
    if (deg > 0) tr.edge_mean.col(b) /= static_cast<double>(deg);
  }

  tr.msg_in.clear();
  tr.msg_pre.clear();
  tr.upd_in.clear();
  tr.upd_pre.clear();
  for (int t = 0; t < c.rounds; ++t) {
    const MatrixXd& mu = tr.mu.back();
    MatrixXd z(2 * n + m, nb);
    z.topRows(n) = mu;
    z.middleRows(n, n).setZero();
    for (Index b = 0; b < nb; ++b) {
      const auto& nbrs = in.neighbors[static_cast<std::size_t>(b)];
      if (nbrs.empty()) continue;
      for (int u : nbrs) z.col(b).segment(n, n) += mu.col(u);
      z.col(b).segment(n, n) /= static_cast<double>(nbrs.size());
    }
    z.bottomRows(m) = tr.edge_mean;
    MatrixXd pre;
    apply_affine(p.message[static_cast<std::size_t>(t)], z, pre);
    MatrixXd y(n + c.message_dim, nb);
    y.topRows(n) = mu;
    y.bottomRows(c.message_dim) = relu(pre);
    MatrixXd upre;
    apply_affine(p.update[static_cast<std::size_t>(t)], y, upre);
    tr.msg_in.push_back(std::move(z));
    tr.msg_pre.push_back(std::move(pre));
    tr.upd_in.push_back(std::move(y));
    tr.mu.push_back(relu(upre));
    tr.upd_pre.push_back(std::move(upre));
  }

  const MatrixXd& mu_t = tr.mu.back();
  const int k = in.state.num_lines();
  tr.line_mean = MatrixXd::Zero(n, k);
  tr.line_size.assign(static_cast<std::size_t>(k), 0);
  const auto line_of = in.state.line_of();
  for (Index b = 0; b < nb; ++b) {
    const int l = line_of[static_cast<std::size_t>(b)];
    tr.line_mean.col(l) += mu_t.col(b);
    ++tr.line_size[static_cast<std::size_t>(l)];
  }
  for (int l = 0; l < k; ++l)
    if (tr.line_size[static_cast<std::size_t>(l)] > 0)
      tr.line_mean.col(l) /= static_cast<double>(tr.line_size[static_cast<std::size_t>(l)]);

  QValues out;
  out.actions = enumerate_actions(in.state);
  out.values.resize(static_cast<Index>(out.actions.size()));
  const auto w_self = p.readout.weight.leftCols(n);
  const auto w_line = p.readout.weight.rightCols(n);
  // Per-stop and per-line halves of the readout are shared across actions.
  const Eigen::RowVectorXd self_term = w_self * mu_t;
  const Eigen::RowVectorXd line_term = w_line * tr.line_mean;
  for (std::size_t a = 0; a < out.actions.size(); ++a) {
    const auto b = static_cast<Index>(in.state.index_of(out.actions[a].stop_id));
    out.values(static_cast<Index>(a)) =
        self_term(b) + line_term(out.actions[a].target_line) + p.readout.bias(0);
  }
  return out;
}

namespace {

// Backpropagates dOut/dQ(S, action) = `scale` into `g` (accumulating).
void backward(const QNetworkParams& p, const GraphInput& in, const ForwardTrace& tr,
              const Action& action, double scale, QGradients& g) {
  const auto& c = p.config;
  const Index nb = in.features.cols();
  const Index n = c.node_dim;
  const Index m = c.edge_dim;
  const auto b_star = static_cast<Index>(in.state.index_of(action.stop_id));
  const int line = action.target_line;
  const int line_size = tr.line_size[static_cast<std::size_t>(line)];

  // Readout.
  g.readout.weight.leftCols(n) += scale * tr.mu.back().col(b_star).transpose();
  g.readout.weight.rightCols(n) += scale * tr.line_mean.col(line).transpose();
  g.readout.bias(0) += scale;

  MatrixXd d_mu = MatrixXd::Zero(n, nb);
  d_mu.col(b_star) += scale * p.readout.weight.leftCols(n).transpose();
  if (line_size > 0) {
    const VectorXd share = scale * p.readout.weight.rightCols(n).transpose() / static_cast<double>(line_size);
    const auto line_of = in.state.line_of();
    for (Index b = 0; b < nb; ++b)
      if (line_of[static_cast<std::size_t>(b)] == line) d_mu.col(b) += share;
  }

  MatrixXd d_edge_mean = MatrixXd::Zero(m, nb);
  for (int t = c.rounds - 1; t >= 0; --t) {
    const auto ut = static_cast<std::size_t>(t);
    const MatrixXd d_upre = d_mu.cwiseProduct(relu_mask(tr.upd_pre[ut]));
    g.update[ut].weight.noalias() += d_upre * tr.upd_in[ut].transpose();
    g.update[ut].bias += d_upre.rowwise().sum();
    const MatrixXd d_y = p.update[ut].weight.transpose() * d_upre;

    MatrixXd d_mu_prev = d_y.topRows(n);
    const MatrixXd d_pre = d_y.bottomRows(c.message_dim).cwiseProduct(relu_mask(tr.msg_pre[ut]));
    g.message[ut].weight.noalias() += d_pre * tr.msg_in[ut].transpose();
    g.message[ut].bias += d_pre.rowwise().sum();
    const MatrixXd d_z = p.message[ut].weight.transpose() * d_pre;

    d_mu_prev += d_z.topRows(n);
    for (Index b = 0; b < nb; ++b) {
      const auto& nbrs = in.neighbors[static_cast<std::size_t>(b)];
      if (nbrs.empty()) continue;
      const VectorXd share = d_z.col(b).segment(n, n) / static_cast<double>(nbrs.size());
      for (int u : nbrs) d_mu_prev.col(u) += share;
    }
    d_edge_mean += d_z.bottomRows(m);
    d_mu = std::move(d_mu_prev);
  }

  const MatrixXd d_node_pre = d_mu.cwiseProduct(relu_mask(tr.node_pre));
  g.embed_node.weight.noalias() += d_node_pre * in.features.transpose();
  g.embed_node.bias += d_node_pre.rowwise().sum();

  const auto edges = static_cast<Index>(tr.edge_src.size());
  if (edges > 0) {
    MatrixXd d_edge(m, edges);
    for (Index e = 0; e < edges; ++e) {
      const int b = tr.edge_dst[static_cast<std::size_t>(e)];
      const auto deg = in.neighbors[static_cast<std::size_t>(b)].size();
      d_edge.col(e) = d_edge_mean.col(b) / static_cast<double>(deg);
    }
    d_edge = d_edge.cwiseProduct(relu_mask(tr.edge_pre));
    g.embed_edge.weight.noalias() += d_edge * tr.edge_in.transpose();
    g.embed_edge.bias += d_edge.rowwise().sum();
  }
}

double q_of(const QValues& q, const Action& action) {
  for (std::size_t i = 0; i < q.actions.size(); ++i)
    if (q.actions[i] == action) return q.values(static_cast<Index>(i));
  throw InadmissibleActionError("action (stop " + std::to_string(action.stop_id) + ", line " +
                                std::to_string(action.target_line + 1) + ") is not admissible");
}

}  // namespace

QGradients q_value_gradient(const QNetworkParams& params, const GraphInput& input, const Action& action) {
  ForwardTrace tr;
  const auto q = forward(params, input, &tr);
  q_of(q, action);
  QGradients g = QNetworkParams::zeros(params.config);
  backward(params, input, tr, action, 1.0, g);
  return g;
}

double squared_error(const QNetworkParams& params, const GraphInput& input, const Action& action,
                     double target) {
  const double diff = target - q_of(forward(params, input), action);
  return diff * diff;
}

double q_learning_target(double max_q_next, double reward, double gamma) {
  return gamma * max_q_next + reward;
}

double q_learning_loss(double q_sa, double max_q_next, double reward, double gamma) {
  const double diff = q_learning_target(max_q_next, reward, gamma) - q_sa;
  return diff * diff;
}

LossResult loss_and_grads(const QNetworkParams& params, const Transition& tr, double gamma) {
  LossResult out;
  const auto next_q = forward(params, tr.next);
  out.target = q_learning_target(next_q.values.size() > 0 ? next_q.max() : 0.0, tr.reward, gamma);

  ForwardTrace trace;
  const auto q = forward(params, tr.state, &trace);
  out.q_value = q_of(q, tr.action);
  const double diff = out.target - out.q_value;
  out.loss = diff * diff;

  out.gradients = QNetworkParams::zeros(params.config);
  if (diff != 0.0) backward(params, tr.state, trace, tr.action, -2.0 * diff, out.gradients);
  return out;
}

QNetworkParams sgd_step(const QNetworkParams& params, const QGradients& gradients, double learning_rate) {
  QNetworkParams next = params;
  std::vector<const void*> grads;
  std::vector<Index> sizes;
  gradients.for_each_tensor([&](const std::string&, const auto& t) {
    grads.push_back(t.data());
    sizes.push_back(t.size());
  });
  std::size_t i = 0;
  next.for_each_tensor([&](const std::string& name, auto& t) {
    if (i >= grads.size() || sizes[i] != t.size())
      throw ConfigurationError("gradient shape mismatch at " + name);
    const double* g = static_cast<const double*>(grads[i++]);
    double* w = t.data();
    for (Index j = 0; j < t.size(); ++j) w[j] -= learning_rate * g[j];
  });
  return next;
}

// --- checkpoints ----------------------------------------------------------

namespace {

constexpr int kCheckpointVersion = 1;

nlohmann::json config_json(const QNetConfig& c) {
  return {{"feature_dim", c.feature_dim},     {"node_dim", c.node_dim},
          {"edge_dim", c.edge_dim},           {"message_dim", c.message_dim},
          {"rounds", c.rounds},               {"learning_rate", c.learning_rate},
          {"gamma", c.gamma},                 {"epsilon_start", c.epsilon_start},
          {"epsilon_end", c.epsilon_end},     {"epsilon_decay_steps", c.epsilon_decay_steps}};
}

}  // namespace

std::string checkpoint_to_json(const QNetworkParams& params) {
  nlohmann::json root;
  root["format"] = "tnd-qnet";
  root["version"] = kCheckpointVersion;
  root["config"] = config_json(params.config);
  nlohmann::json tensors = nlohmann::json::object();
  params.for_each_tensor([&](const std::string& name, const auto& t) {
    std::vector<double> data(t.data(), t.data() + t.size());
    tensors[name] = {{"rows", t.rows()}, {"cols", t.cols()}, {"data", std::move(data)}};
  });
  root["tensors"] = std::move(tensors);
  return root.dump() + "\n";
}

QNetworkParams checkpoint_from_json(const std::string& text, const QNetConfig* expected) {
  using detail::field;
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (field<std::string>(root, "format", "") != "tnd-qnet") throw ParseError("not a tnd-qnet checkpoint");
  const int version = field<int>(root, "version", "");
  if (version != kCheckpointVersion)
    throw ConfigurationError("unsupported checkpoint version " + std::to_string(version));

  const auto& cj = detail::child(root, "config", "");
  QNetConfig c;
  c.feature_dim = field<int>(cj, "feature_dim", "config");
  c.node_dim = field<int>(cj, "node_dim", "config");
  c.edge_dim = field<int>(cj, "edge_dim", "config");
  c.message_dim = field<int>(cj, "message_dim", "config");
  c.rounds = field<int>(cj, "rounds", "config");
  c.learning_rate = field<double>(cj, "learning_rate", "config");
  c.gamma = field<double>(cj, "gamma", "config");
  c.epsilon_start = field<double>(cj, "epsilon_start", "config");
  c.epsilon_end = field<double>(cj, "epsilon_end", "config");
  c.epsilon_decay_steps = field<int>(cj, "epsilon_decay_steps", "config");
  validate(c);

  if (expected) {
    auto mismatch = [&](const char* what, int have, int want) {
      if (have != want)
        throw ConfigurationError(std::string("checkpoint ") + what + " is " + std::to_string(have) +
                                 ", expected " + std::to_string(want));
    };
    mismatch("feature_dim", c.feature_dim, expected->feature_dim);
    mismatch("node_dim", c.node_dim, expected->node_dim);
    mismatch("edge_dim", c.edge_dim, expected->edge_dim);
    mismatch("message_dim", c.message_dim, expected->message_dim);
    mismatch("rounds", c.rounds, expected->rounds);
  }

  QNetworkParams p = QNetworkParams::zeros(c);
  const auto& tensors = detail::child(root, "tensors", "");
  p.for_each_tensor([&](const std::string& name, auto& t) {
    const auto where = "tensors." + name;
    const auto& tj = detail::child(tensors, name, "tensors");
    const auto rows = field<Index>(tj, "rows", where);
    const auto cols = field<Index>(tj, "cols", where);
    if (rows != t.rows() || cols != t.cols())
      throw ConfigurationError(where + " has shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                               ", expected " + std::to_string(t.rows()) + "x" + std::to_string(t.cols()));
    const auto data = field<std::vector<double>>(tj, "data", where);
    if (static_cast<Index>(data.size()) != t.size()) throw ParseError(where + ".data has the wrong length");
    std::copy(data.begin(), data.end(), t.data());
  });
  return p;
}

void save_checkpoint(const QNetworkParams& params, const std::filesystem::path& path) {
  detail::write_text_file(path, checkpoint_to_json(params));
}

QNetworkParams load_checkpoint(const std::filesystem::path& path, const QNetConfig* expected) {
  return checkpoint_from_json(detail::read_text_file(path), expected);
}

}  // namespace tnd
