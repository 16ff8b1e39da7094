#include "chartparse/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace chartparse::ad {

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t k = 0; k < shape.size(); ++k) {
    if (k) out << 'x';
    out << shape[k];
  }
  out << ']';
  return out.str();
}

namespace {

std::size_t product(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " +
                              shape_string(b));
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(product(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != product(shape_))
    throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                " does not match shape " + shape_string(shape_));
}

Tensor Tensor::vector(std::vector<double> data) {
  const std::size_t n = data.size();
  return Tensor({n}, std::move(data));
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------
// ParamStore

Parameter& ParamStore::add(const std::string& name, Shape shape, Init init, std::mt19937_64& rng) {
  Tensor value(shape, 0.0);
  switch (init) {
    case Init::Zeros:
      break;
    case Init::Glorot: {
      const double fan_out = static_cast<double>(shape.empty() ? 1 : shape[0]);
      const double fan_in = static_cast<double>(shape.size() < 2 ? 1 : shape[1]);
      const double bound = std::sqrt(6.0 / (fan_in + fan_out));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (auto& v : value.data()) v = dist(rng);
      break;
    }
    case Init::SmallNormal: {
      std::normal_distribution<double> dist(0.0, 1.0);
      for (auto& v : value.data()) v = 0.01 * dist(rng);
      break;
    }
    case Init::Normal: {
      std::normal_distribution<double> dist(0.0, 1.0);
      for (auto& v : value.data()) v = dist(rng);
      break;
    }
  }
  return add(name, std::move(value));
}

Parameter& ParamStore::add(const std::string& name, Tensor value) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->grad = Tensor(value.shape(), 0.0);
  p->mean_sq_grad = Tensor(value.shape(), 0.0);
  p->mean_sq_delta = Tensor(value.shape(), 0.0);
  p->value = std::move(value);
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ParamStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
  return *params_[it->second];
}

const Parameter& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
  return *params_[it->second];
}

std::vector<Parameter*> ParamStore::parameters() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParamStore::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t total = 0;
  for (const auto& p : params_) total += p->value.size();
  return total;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p->grad.fill(0.0);
}

void ParamStore::adadelta_step(double rho, double eps) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("adadelta: rho must lie in (0, 1)");
  if (!(eps > 0.0)) throw std::invalid_argument("adadelta: eps must be positive");
  for (auto& p : params_) {
    if (!p->grad.all_finite()) throw std::runtime_error("adadelta: non-finite gradient in " + p->name);
  }
  for (auto& p : params_) {
    auto w = p->value.data();
    auto g = p->grad.data();
    auto eg = p->mean_sq_grad.data();
    auto ed = p->mean_sq_delta.data();
    for (std::size_t k = 0; k < w.size(); ++k) {
      eg[k] = rho * eg[k] + (1.0 - rho) * g[k] * g[k];
      const double delta = -std::sqrt(ed[k] + eps) / std::sqrt(eg[k] + eps) * g[k];
      ed[k] = rho * ed[k] + (1.0 - rho) * delta * delta;
      w[k] += delta;
      g[k] = 0.0;
    }
  }
}

// ---------------------------------------------------------------------------
// Graph

const Tensor& Expr::value() const { return graph_->value(*this); }
double Expr::scalar() const {
  const Tensor& v = value();
  if (!v.is_scalar()) throw std::invalid_argument("expression is not scalar: " + shape_string(v.shape()));
  return v[0];
}

Expr Graph::push(Node node) {
  node.grad_needed = node.op == Op::Param || node.op == Op::Lookup;
  for (std::uint32_t arg : node.args) node.grad_needed = node.grad_needed || nodes_[arg].grad_needed;
  nodes_.push_back(std::move(node));
  return Expr(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Expr Graph::input(Tensor value) {
  Node n;
  n.op = Op::Input;
  n.value = std::move(value);
  return push(std::move(n));
}

Expr Graph::param(Parameter& p) {
  Node n;
  n.op = Op::Param;
  n.param = &p;
  return push(std::move(n));
}

Expr Graph::lookup(Parameter& p, std::size_t row) {
  if (p.value.shape().size() != 2 || row >= p.value.rows())
    throw std::out_of_range("lookup: row " + std::to_string(row) + " outside " + shape_string(p.value.shape()) +
                            " of " + p.name);
  Node n;
  n.op = Op::Lookup;
  n.param = &p;
  n.aux = row;
  const std::size_t cols = p.value.cols();
  const auto src = p.value.data().subspan(row * cols, cols);
  n.value = Tensor({cols}, std::vector<double>(src.begin(), src.end()));
  return push(std::move(n));
}

const Tensor& Graph::node_value(std::uint32_t id) const {
  const Node& n = nodes_[id];
  return n.op == Op::Param ? n.param->value : n.value;
}

const Tensor& Graph::value(Expr e) const { return node_value(e.id()); }

Tensor Graph::gradient(Expr e) const {
  const Node& n = nodes_[e.id()];
  if (n.op == Op::Param) return n.param->grad;
  if (n.grad.size() == 0) return Tensor(node_value(e.id()).shape(), 0.0);
  return n.grad;
}

Tensor& Graph::grad_slot(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.op == Op::Param) return n.param->grad;
  if (n.grad.size() == 0) n.grad = Tensor(node_value(id).shape(), 0.0);
  return n.grad;
}

void Graph::backward(Expr loss) {
  if (loss.graph() != this) throw std::invalid_argument("backward: expression belongs to another graph");
  const Tensor& lv = node_value(loss.id());
  if (!lv.is_scalar()) throw std::invalid_argument("backward: loss must be scalar, got " + shape_string(lv.shape()));
  for (auto& n : nodes_) n.grad = Tensor();
  grad_slot(loss.id())[0] += 1.0;
  for (std::int64_t id = loss.id(); id >= 0; --id) {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.op == Op::Param || !n.grad_needed || n.grad.size() == 0) continue;
    backprop(static_cast<std::uint32_t>(id));
  }
}

void Graph::backprop(std::uint32_t id) {
  // grad_slot may allocate on other nodes, but never reallocates nodes_.
  Node& n = nodes_[id];
  const Tensor& g = n.grad;
  auto needs = [&](std::uint32_t arg) { return nodes_[arg].grad_needed; };
  switch (n.op) {
    case Op::Input:
    case Op::Param:
      break;
    case Op::Lookup: {
      Tensor& pg = n.param->grad;
      const std::size_t cols = pg.cols();
      for (std::size_t c = 0; c < cols; ++c) pg[n.aux * cols + c] += g[c];
      break;
    }
    case Op::MatMul: {
      const std::uint32_t ia = n.args[0], ib = n.args[1];
      const Tensor& A = node_value(ia);
      const Tensor& B = node_value(ib);
      const std::size_t m = A.rows(), k = A.cols();
      const std::size_t p = B.shape().size() == 1 ? 1 : B.cols();
      if (needs(ia)) {
        Tensor& dA = grad_slot(ia);
        for (std::size_t r = 0; r < m; ++r)
          for (std::size_t c = 0; c < k; ++c) {
            double acc = 0.0;
            for (std::size_t q = 0; q < p; ++q) acc += g[r * p + q] * B[c * p + q];
            dA[r * k + c] += acc;
          }
      }
      if (needs(ib)) {
        Tensor& dB = grad_slot(ib);
        for (std::size_t r = 0; r < m; ++r)
          for (std::size_t c = 0; c < k; ++c) {
            const double a = A[r * k + c];
            for (std::size_t q = 0; q < p; ++q) dB[c * p + q] += a * g[r * p + q];
          }
      }
      break;
    }
    case Op::Add:
    case Op::Sub: {
      const double sign = n.op == Op::Add ? 1.0 : -1.0;
      if (needs(n.args[0])) {
        Tensor& da = grad_slot(n.args[0]);
        for (std::size_t k = 0; k < g.size(); ++k) da[k] += g[k];
      }
      if (needs(n.args[1])) {
        Tensor& db = grad_slot(n.args[1]);
        for (std::size_t k = 0; k < g.size(); ++k) db[k] += sign * g[k];
      }
      break;
    }
    case Op::CMult: {
      const std::uint32_t ia = n.args[0], ib = n.args[1];
      if (needs(ia)) {
        const Tensor& b = node_value(ib);
        Tensor& da = grad_slot(ia);
        for (std::size_t k = 0; k < g.size(); ++k) da[k] += g[k] * b[k];
      }
      if (needs(ib)) {
        const Tensor& a = node_value(ia);
        Tensor& db = grad_slot(ib);
        for (std::size_t k = 0; k < g.size(); ++k) db[k] += g[k] * a[k];
      }
      break;
    }
    case Op::Scale:
    case Op::AddScalar: {
      if (!needs(n.args[0])) break;
      const double c = n.op == Op::Scale ? n.coef : 1.0;
      Tensor& da = grad_slot(n.args[0]);
      for (std::size_t k = 0; k < g.size(); ++k) da[k] += c * g[k];
      break;
    }
    case Op::Concat: {
      std::size_t offset = 0;
      for (std::uint32_t arg : n.args) {
        const std::size_t len = node_value(arg).size();
        if (needs(arg)) {
          Tensor& da = grad_slot(arg);
          for (std::size_t k = 0; k < len; ++k) da[k] += g[offset + k];
        }
        offset += len;
      }
      break;
    }
    case Op::Tanh:
    case Op::Sigmoid:
    case Op::Relu: {
      if (!needs(n.args[0])) break;
      Tensor& da = grad_slot(n.args[0]);
      const Tensor& y = n.value;
      for (std::size_t k = 0; k < g.size(); ++k) {
        double d = 0.0;
        if (n.op == Op::Tanh) d = 1.0 - y[k] * y[k];
        else if (n.op == Op::Sigmoid) d = y[k] * (1.0 - y[k]);
        else d = y[k] > 0.0 ? 1.0 : 0.0;
        da[k] += d * g[k];
      }
      break;
    }
    case Op::Pick:
    case Op::Max: {
      if (!needs(n.args[0])) break;
      grad_slot(n.args[0])[n.aux] += g[0];
      break;
    }
    case Op::Slice: {
      if (!needs(n.args[0])) break;
      Tensor& da = grad_slot(n.args[0]);
      for (std::size_t k = 0; k < g.size(); ++k) da[n.aux + k] += g[k];
      break;
    }
    case Op::Sum: {
      if (!needs(n.args[0])) break;
      Tensor& da = grad_slot(n.args[0]);
      for (std::size_t k = 0; k < da.size(); ++k) da[k] += g[0];
      break;
    }
  }
}

// ---------------------------------------------------------------------------
// Operations

namespace {

Graph* same_graph(Expr a, Expr b) {
  if (!a.valid() || a.graph() != b.graph()) throw std::invalid_argument("expressions from different graphs");
  return a.graph();
}

}  // namespace

Expr matmul(Expr a, Expr b) {
  Graph* g = same_graph(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.shape().size() != 2 || B.shape().empty() || B.shape().size() > 2 || A.cols() != B.rows())
    shape_error("matmul", A.shape(), B.shape());
  const std::size_t m = A.rows(), k = A.cols();
  const bool vec = B.shape().size() == 1;
  const std::size_t p = vec ? 1 : B.cols();
  Tensor out(vec ? Shape{m} : Shape{m, p}, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    const double* row = A.data().data() + r * k;
    for (std::size_t q = 0; q < p; ++q) {
      double acc = 0.0;
      for (std::size_t c = 0; c < k; ++c) acc += row[c] * B[c * p + q];
      out[r * p + q] = acc;
    }
  }
  Graph::Node n;
  n.op = Op::MatMul;
  n.args = {a.id(), b.id()};
  n.value = std::move(out);
  return g->push(std::move(n));
}

namespace {

template <typename F>
Tensor zip(const char* name, const Tensor& a, const Tensor& b, F f) {
  if (a.shape() != b.shape()) shape_error(name, a.shape(), b.shape());
  Tensor out(a.shape(), 0.0);
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = f(a[k], b[k]);
  return out;
}

template <typename F>
Tensor map_values(const Tensor& a, F f) {
  Tensor out(a.shape(), 0.0);
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = f(a[k]);
  return out;
}

}  // namespace

Expr operator+(Expr a, Expr b) {
  Graph* g = same_graph(a, b);
  Graph::Node n;
  n.op = Op::Add;
  n.args = {a.id(), b.id()};
  n.value = zip("add", a.value(), b.value(), [](double x, double y) { return x + y; });
  return g->push(std::move(n));
}

Expr operator-(Expr a, Expr b) {
  Graph* g = same_graph(a, b);
  Graph::Node n;
  n.op = Op::Sub;
  n.args = {a.id(), b.id()};
  n.value = zip("sub", a.value(), b.value(), [](double x, double y) { return x - y; });
  return g->push(std::move(n));
}

Expr cmult(Expr a, Expr b) {
  Graph* g = same_graph(a, b);
  Graph::Node n;
  n.op = Op::CMult;
  n.args = {a.id(), b.id()};
  n.value = zip("cmult", a.value(), b.value(), [](double x, double y) { return x * y; });
  return g->push(std::move(n));
}

Expr scale(Expr a, double c) {
  Graph::Node n;
  n.op = Op::Scale;
  n.args = {a.id()};
  n.coef = c;
  n.value = map_values(a.value(), [c](double x) { return c * x; });
  return a.graph()->push(std::move(n));
}

Expr add_scalar(Expr a, double c) {
  Graph::Node n;
  n.op = Op::AddScalar;
  n.args = {a.id()};
  n.coef = c;
  n.value = map_values(a.value(), [c](double x) { return x + c; });
  return a.graph()->push(std::move(n));
}

Expr concat(std::span<const Expr> parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  Graph* g = parts.front().graph();
  std::vector<double> data;
  Graph::Node n;
  n.op = Op::Concat;
  for (const Expr& e : parts) {
    if (e.graph() != g) throw std::invalid_argument("expressions from different graphs");
    const Tensor& v = e.value();
    if (v.shape().size() != 1) throw std::invalid_argument("concat: expects vectors, got " + shape_string(v.shape()));
    data.insert(data.end(), v.data().begin(), v.data().end());
    n.args.push_back(e.id());
  }
  n.value = Tensor::vector(std::move(data));
  return g->push(std::move(n));
}

Expr tanh(Expr a) {
  Graph::Node n;
  n.op = Op::Tanh;
  n.args = {a.id()};
  n.value = map_values(a.value(), [](double x) { return std::tanh(x); });
  return a.graph()->push(std::move(n));
}

Expr sigmoid(Expr a) {
  Graph::Node n;
  n.op = Op::Sigmoid;
  n.args = {a.id()};
  n.value = map_values(a.value(), [](double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  return a.graph()->push(std::move(n));
}

Expr relu(Expr a) {
  Graph::Node n;
  n.op = Op::Relu;
  n.args = {a.id()};
  n.value = map_values(a.value(), [](double x) { return x > 0.0 ? x : 0.0; });
  return a.graph()->push(std::move(n));
}

Expr pick(Expr a, std::size_t index) {
  const Tensor& v = a.value();
  if (index >= v.size())
    throw std::out_of_range("pick: index " + std::to_string(index) + " outside " + shape_string(v.shape()));
  Graph::Node n;
  n.op = Op::Pick;
  n.args = {a.id()};
  n.aux = index;
  n.value = Tensor::scalar(v[index]);
  return a.graph()->push(std::move(n));
}

Expr slice(Expr a, std::size_t begin, std::size_t end) {
  const Tensor& v = a.value();
  if (v.shape().size() != 1 || begin >= end || end > v.size())
    throw std::out_of_range("slice: [" + std::to_string(begin) + ", " + std::to_string(end) + ") of " +
                            shape_string(v.shape()));
  Graph::Node n;
  n.op = Op::Slice;
  n.args = {a.id()};
  n.aux = begin;
  const auto src = v.data().subspan(begin, end - begin);
  n.value = Tensor::vector(std::vector<double>(src.begin(), src.end()));
  return a.graph()->push(std::move(n));
}

Expr max_element(Expr a) {
  const Tensor& v = a.value();
  if (v.size() == 0) throw std::invalid_argument("max_element: empty tensor");
  const auto data = v.data();
  const std::size_t best = static_cast<std::size_t>(std::max_element(data.begin(), data.end()) - data.begin());
  Graph::Node n;
  n.op = Op::Max;
  n.args = {a.id()};
  n.aux = best;
  n.value = Tensor::scalar(v[best]);
  return a.graph()->push(std::move(n));
}

Expr sum(Expr a) {
  const Tensor& v = a.value();
  double total = 0.0;
  for (double x : v.data()) total += x;
  Graph::Node n;
  n.op = Op::Sum;
  n.args = {a.id()};
  n.value = Tensor::scalar(total);
  return a.graph()->push(std::move(n));
}

}  // namespace chartparse::ad
