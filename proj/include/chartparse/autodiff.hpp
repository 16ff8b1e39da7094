#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace chartparse::ad {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles. Vectors have rank 1, matrices rank 2.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor vector(std::vector<double> data);
  static Tensor scalar(double value) { return Tensor({1}, {value}); }

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }
  bool is_scalar() const { return data_.size() == 1; }

  double& operator[](std::size_t k) { return data_[k]; }
  double operator[](std::size_t k) const { return data_[k]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  void fill(double value);
  bool all_finite() const;
  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// A trainable tensor with its gradient slot and AdaDelta accumulators.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor mean_sq_grad;
  Tensor mean_sq_delta;
};

/// SmallNormal is N(0, 1) scaled by 0.01; Normal is unscaled N(0, 1).
enum class Init { Zeros, Glorot, SmallNormal, Normal };

class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;

  Parameter& add(const std::string& name, Shape shape, Init init, std::mt19937_64& rng);
  Parameter& add(const std::string& name, Tensor value);

  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  /// Parameters in insertion order.
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

  std::size_t scalar_count() const;
  void zero_grad();

  /// AdaDelta: E[g^2] <- rho E[g^2] + (1-rho) g^2;  d = -sqrt(E[d^2]+eps)/sqrt(E[g^2]+eps) g;
  /// E[d^2] <- rho E[d^2] + (1-rho) d^2;  w <- w + d.  Clears gradients afterwards.
  void adadelta_step(double rho, double eps);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, std::size_t> index_;
};

class Graph;

/// Handle to a node of a Graph.
class Expr {
 public:
  Expr() = default;
  Expr(Graph* graph, std::uint32_t id) : graph_(graph), id_(id) {}

  Graph* graph() const { return graph_; }
  std::uint32_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }
  const Tensor& value() const;
  double scalar() const;

 private:
  Graph* graph_ = nullptr;
  std::uint32_t id_ = 0;
};

enum class Op : std::uint8_t {
  Input,
  Param,
  Lookup,
  MatMul,
  Add,
  Sub,
  CMult,
  Scale,
  AddScalar,
  Concat,
  Tanh,
  Sigmoid,
  Relu,
  Pick,
  Slice,
  Max,
  Sum,
};

/// Define-by-run computation graph. Nodes are appended in evaluation order, so
/// backward is a reverse sweep. Parameter leaves accumulate straight into
/// Parameter::grad.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Expr input(Tensor value);
  Expr constant(double value) { return input(Tensor::scalar(value)); }
  Expr zeros(std::size_t n) { return input(Tensor({n}, 0.0)); }
  Expr param(Parameter& p);
  /// Row `row` of a rank-2 parameter as a vector.
  Expr lookup(Parameter& p, std::size_t row);

  const Tensor& value(Expr e) const;
  /// Gradient of a non-parameter node after backward(); zeros if unreached.
  Tensor gradient(Expr e) const;
  std::size_t size() const { return nodes_.size(); }

  void backward(Expr loss);

 private:
  friend Expr matmul(Expr a, Expr b);
  friend Expr operator+(Expr a, Expr b);
  friend Expr operator-(Expr a, Expr b);
  friend Expr cmult(Expr a, Expr b);
  friend Expr scale(Expr a, double c);
  friend Expr add_scalar(Expr a, double c);
  friend Expr concat(std::span<const Expr> parts);
  friend Expr tanh(Expr a);
  friend Expr sigmoid(Expr a);
  friend Expr relu(Expr a);
  friend Expr pick(Expr a, std::size_t index);
  friend Expr slice(Expr a, std::size_t begin, std::size_t end);
  friend Expr max_element(Expr a);
  friend Expr sum(Expr a);

  struct Node {
    Op op = Op::Input;
    std::vector<std::uint32_t> args;
    std::size_t aux = 0;
    double coef = 0.0;
    Parameter* param = nullptr;
    bool grad_needed = false;
    Tensor value;
    Tensor grad;
  };

  Expr push(Node node);
  const Tensor& node_value(std::uint32_t id) const;
  Tensor& grad_slot(std::uint32_t id);
  void backprop(std::uint32_t id);

  std::vector<Node> nodes_;
};

Expr matmul(Expr a, Expr b);
Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr cmult(Expr a, Expr b);
Expr scale(Expr a, double c);
Expr add_scalar(Expr a, double c);
Expr concat(std::span<const Expr> parts);
inline Expr concat(std::initializer_list<Expr> parts) {
  return concat(std::span<const Expr>(parts.begin(), parts.size()));
}
Expr tanh(Expr a);
Expr sigmoid(Expr a);
Expr relu(Expr a);
Expr pick(Expr a, std::size_t index);
Expr slice(Expr a, std::size_t begin, std::size_t end);
/// Maximum entry; the gradient flows to the first maximizing index.
Expr max_element(Expr a);
Expr sum(Expr a);

}  // namespace chartparse::ad
