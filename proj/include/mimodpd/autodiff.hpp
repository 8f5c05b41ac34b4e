#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mimodpd/common.hpp"

namespace mimodpd::ad {

using Shape = std::vector<int>;

std::size_t numel(const Shape& s);

/// Trainable tensor. Complex tensors keep a trailing dimension of 2 (re, im).
struct ParamTensor {
  std::string name;
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;
  int id = 0;

  ParamTensor() = default;
  ParamTensor(std::string n, Shape s, int id_);
  void zero_grad();
};

class Tape;

struct Var {
  int id = -1;
};

/// Reverse-mode tape. Nodes are appended in evaluation order; backward()
/// replays the recorded closures in reverse and then adds parameter gradients
/// into ParamTensor::grad. A tape can be differentiated once.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, Var self)>;

  Var constant(Shape shape, std::vector<double> values);
  Var parameter(ParamTensor& p);
  /// needs_grad: whether any input requires a gradient. The closure runs only
  /// in that case and is responsible for accumulating into its inputs.
  Var record(Shape shape, std::vector<double> values, bool needs_grad, BackwardFn fn);

  const std::vector<double>& value(Var v) const { return nodes_.at(v.id).value; }
  const Shape& shape(Var v) const { return nodes_.at(v.id).shape; }
  bool needs_grad(Var v) const { return nodes_.at(v.id).needs_grad; }
  /// Gradient buffer of a node, allocated as zeros on first use.
  std::vector<double>& grad(Var v);
  const cplx* cvalue(Var v) const;
  cplx* cgrad(Var v);

  void backward(Var loss);
  bool consumed() const { return consumed_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool needs_grad = false;
    ParamTensor* param = nullptr;
    BackwardFn backward;
  };
  void check_open() const;

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

}  // namespace mimodpd::ad
