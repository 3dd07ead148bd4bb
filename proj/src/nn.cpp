#include "ising/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ising::nn {

namespace {

void check_architecture(const Mlp& m) {
  if (m.weights.empty() || m.weights.size() != m.biases.size() ||
      m.weights.size() != m.activations.size())
    throw std::invalid_argument("nn: inconsistent layer containers");
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    if (m.weights[l].rows() != m.biases[l].size())
      throw std::invalid_argument("nn: weight/bias shape mismatch");
    if (l > 0 && m.weights[l].cols() != m.weights[l - 1].rows())
      throw std::invalid_argument("nn: consecutive layer dims mismatch");
  }
}

Eigen::MatrixXd apply_activation(Activation act, Eigen::MatrixXd pre) {
  if (act == Activation::tanh) return pre.array().tanh().matrix();
  return pre;
}

}  // namespace

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += static_cast<std::size_t>(weights[l].size()) +
         static_cast<std::size_t>(biases[l].size());
  return n;
}

Mlp make_mlp(const std::vector<int>& dims, const std::vector<Activation>& acts,
             RngStream& rng) {
  if (dims.size() < 2) throw std::invalid_argument("make_mlp: need at least one layer");
  if (acts.size() != dims.size() - 1)
    throw std::invalid_argument("make_mlp: one activation tag per layer required");
  for (int d : dims)
    if (d < 1) throw std::invalid_argument("make_mlp: dims must be positive");

  Mlp m;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c)
        w(r, c) = bound * (2.0 * rng.next_double() - 1.0);
    m.weights.push_back(std::move(w));
    m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    m.activations.push_back(acts[l]);
  }
  return m;
}

Eigen::MatrixXd forward(const Mlp& m, const Eigen::MatrixXd& x, ForwardCache* cache) {
  check_architecture(m);
  if (x.rows() != m.input_dim())
    throw std::invalid_argument("forward: input dim mismatch");
  if (cache) {
    cache->input = x;
    cache->post.clear();
    cache->post.reserve(m.weights.size());
  }
  Eigen::MatrixXd cur = x;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    Eigen::MatrixXd pre = m.weights[l] * cur;
    pre.colwise() += m.biases[l];
    cur = apply_activation(m.activations[l], std::move(pre));
    if (cache) cache->post.push_back(cur);
  }
  return cur;
}

Eigen::VectorXd forward(const Mlp& m, const Eigen::VectorXd& x) {
  return forward(m, Eigen::MatrixXd(x), nullptr).col(0);
}

Gradients backward(const Mlp& m, const ForwardCache& cache,
                   const Eigen::MatrixXd& grad_out) {
  check_architecture(m);
  const auto layers = m.weights.size();
  if (cache.post.size() != layers)
    throw std::invalid_argument("backward: cache does not match this network");
  if (grad_out.rows() != m.output_dim() || grad_out.cols() != cache.input.cols())
    throw std::invalid_argument("backward: grad_out shape mismatch");

  Gradients g;
  g.dw.resize(layers);
  g.db.resize(layers);

  Eigen::MatrixXd delta = grad_out;
  for (std::size_t l = layers; l-- > 0;) {
    if (m.activations[l] == Activation::tanh) {
      // tanh' recovered from the cached output: 1 - post^2
      delta = delta.cwiseProduct(
          (1.0 - cache.post[l].array().square()).matrix());
    }
    const Eigen::MatrixXd& prev = l == 0 ? cache.input : cache.post[l - 1];
    g.dw[l].noalias() = delta * prev.transpose();
    g.db[l] = delta.rowwise().sum();
    if (l > 0)
      delta = m.weights[l].transpose() * delta;
    else
      g.dx.noalias() = m.weights[0].transpose() * delta;
  }
  return g;
}

OptimState make_optim_state(const Mlp& m, double lr) {
  OptimState s;
  s.lr = lr;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    s.mw.push_back(Eigen::MatrixXd::Zero(m.weights[l].rows(), m.weights[l].cols()));
    s.vw.push_back(Eigen::MatrixXd::Zero(m.weights[l].rows(), m.weights[l].cols()));
    s.mb.push_back(Eigen::VectorXd::Zero(m.biases[l].size()));
    s.vb.push_back(Eigen::VectorXd::Zero(m.biases[l].size()));
  }
  return s;
}

void opt_step(Mlp& m, const Gradients& g, OptimState& s) {
  if (g.dw.size() != m.weights.size() || s.mw.size() != m.weights.size())
    throw std::invalid_argument("opt_step: shape mismatch");
  s.step += 1;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    s.mw[l] = s.beta1 * s.mw[l] + (1.0 - s.beta1) * g.dw[l];
    s.vw[l] = s.beta2 * s.vw[l] + (1.0 - s.beta2) * g.dw[l].cwiseProduct(g.dw[l]);
    m.weights[l].array() -= s.lr * (s.mw[l].array() / bc1) /
                            ((s.vw[l].array() / bc2).sqrt() + s.eps);
    s.mb[l] = s.beta1 * s.mb[l] + (1.0 - s.beta1) * g.db[l];
    s.vb[l] = s.beta2 * s.vb[l] + (1.0 - s.beta2) * g.db[l].cwiseProduct(g.db[l]);
    m.biases[l].array() -= s.lr * (s.mb[l].array() / bc1) /
                           ((s.vb[l].array() / bc2).sqrt() + s.eps);
  }
}

namespace {

template <class T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T read_pod(std::ifstream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("nn: truncated model file");
  return v;
}

constexpr char kMagic[4] = {'I', 'F', 'M', '1'};
constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

void save_mlp(const Mlp& m, const std::filesystem::path& path) {
  check_architecture(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_mlp: cannot open " + path.string());
  out.write(kMagic, 4);
  write_pod(out, kFormatVersion);
  write_pod(out, static_cast<std::uint32_t>(m.layer_count()));
  write_pod(out, static_cast<std::uint32_t>(m.input_dim()));
  for (const auto& w : m.weights) write_pod(out, static_cast<std::uint32_t>(w.rows()));
  for (auto a : m.activations) write_pod(out, static_cast<std::uint8_t>(a));
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    const RowMajor w = m.weights[l];
    out.write(reinterpret_cast<const char*>(w.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(w.size())));
    out.write(reinterpret_cast<const char*>(m.biases[l].data()),
              static_cast<std::streamsize>(sizeof(double) *
                                           static_cast<std::size_t>(m.biases[l].size())));
  }
  if (!out) throw std::runtime_error("save_mlp: write failed for " + path.string());
}

Mlp load_mlp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_mlp: cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("load_mlp: bad magic in " + path.string());
  if (read_pod<std::uint32_t>(in) != kFormatVersion)
    throw std::runtime_error("load_mlp: unsupported format version");
  const auto layers = read_pod<std::uint32_t>(in);
  if (layers == 0 || layers > 64) throw std::runtime_error("load_mlp: bad layer count");
  std::vector<int> dims(layers + 1);
  dims[0] = static_cast<int>(read_pod<std::uint32_t>(in));
  for (std::uint32_t l = 0; l < layers; ++l)
    dims[l + 1] = static_cast<int>(read_pod<std::uint32_t>(in));
  Mlp m;
  for (std::uint32_t l = 0; l < layers; ++l) {
    const auto tag = read_pod<std::uint8_t>(in);
    if (tag > 1) throw std::runtime_error("load_mlp: unknown activation tag");
    m.activations.push_back(static_cast<Activation>(tag));
  }
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  for (std::uint32_t l = 0; l < layers; ++l) {
    RowMajor w(dims[l + 1], dims[l]);
    in.read(reinterpret_cast<char*>(w.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(w.size())));
    Eigen::VectorXd b(dims[l + 1]);
    in.read(reinterpret_cast<char*>(b.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(b.size())));
    if (!in) throw std::runtime_error("load_mlp: truncated model file");
    m.weights.push_back(Eigen::MatrixXd(w));
    m.biases.push_back(std::move(b));
  }
  check_architecture(m);
  return m;
}

}  // namespace ising::nn
