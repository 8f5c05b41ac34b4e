#include "mimodpd/autodiff.hpp"

#include <cmath>

namespace mimodpd::ad {

std::size_t numel(const Shape& s) {
  std::size_t n = 1;
  for (int d : s) n *= static_cast<std::size_t>(d);
  return n;
}

ParamTensor::ParamTensor(std::string n, Shape s, int id_)
    : name(std::move(n)), shape(std::move(s)), id(id_) {
  values.assign(numel(shape), 0.0);
  grad.assign(values.size(), 0.0);
}

void ParamTensor::zero_grad() { grad.assign(values.size(), 0.0); }

void Tape::check_open() const {
  require(!consumed_, ErrorCode::kTapeConsumed, "tape already consumed by backward()");
}

Var Tape::constant(Shape shape, std::vector<double> values) {
  check_open();
  require(numel(shape) == values.size(), ErrorCode::kShapeMismatch,
          "tape: constant value size does not match shape");
  nodes_.push_back(Node{std::move(shape), std::move(values), {}, false, nullptr, {}});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::parameter(ParamTensor& p) {
  check_open();
  require(numel(p.shape) == p.values.size(), ErrorCode::kShapeMismatch,
          "tape: parameter value size does not match shape");
  if (p.grad.size() != p.values.size()) p.grad.assign(p.values.size(), 0.0);
  nodes_.push_back(Node{p.shape, p.values, {}, true, &p, {}});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::record(Shape shape, std::vector<double> values, bool needs_grad, BackwardFn fn) {
  check_open();
  require(numel(shape) == values.size(), ErrorCode::kShapeMismatch,
          "tape: recorded value size does not match shape");
  nodes_.push_back(Node{std::move(shape), std::move(values), {}, needs_grad, nullptr,
                        needs_grad ? std::move(fn) : BackwardFn{}});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

std::vector<double>& Tape::grad(Var v) {
  Node& n = nodes_.at(v.id);
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

const cplx* Tape::cvalue(Var v) const {
  return reinterpret_cast<const cplx*>(nodes_.at(v.id).value.data());
}

cplx* Tape::cgrad(Var v) { return reinterpret_cast<cplx*>(grad(v).data()); }

void Tape::backward(Var loss) {
  check_open();
  require(nodes_.at(loss.id).value.size() == 1, ErrorCode::kShapeMismatch,
          "backward: loss must be a scalar");
  consumed_ = true;
  grad(loss)[0] = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, Var{i});
    if (n.param) {
      for (std::size_t k = 0; k < n.grad.size(); ++k) {
        require(std::isfinite(n.grad[k]), ErrorCode::kNonFinite,
                "backward: non-finite gradient for " + n.param->name);
        n.param->grad[k] += n.grad[k];
      }
    }
  }
}

}  // namespace mimodpd::ad
