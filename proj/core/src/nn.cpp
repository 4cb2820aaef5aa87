#include "lanegcn/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace lanegcn {

Tensor ParameterStore::create(const std::string& name, Shape shape, Init init,
                              long fan_in) {
  if (index_.count(name)) {
    throw std::invalid_argument("duplicate parameter name: " + name);
  }
  Tensor t;
  switch (init) {
    case Init::kZero:
      t = Tensor::zeros(shape);
      break;
    case Init::kOne:
      t = Tensor::full(shape, 1.0);
      break;
    case Init::kUniformFanIn: {
      if (fan_in == 0) {
        if (shape.size() == 2) {
          fan_in = shape[0];
        } else if (shape.size() == 3) {
          fan_in = shape[1] * shape[2];
        } else {
          throw std::invalid_argument("fan_in required for parameter " + name);
        }
      }
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      std::uniform_real_distribution<double> dist(-bound, bound);
      t = Tensor::zeros(shape);
      double* p = t.mutable_data();
      for (long i = 0; i < t.size(); ++i) p[i] = dist(rng_);
      break;
    }
  }
  t.set_requires_grad(true);
  index_[name] = entries_.size();
  entries_.emplace_back(name, t);
  return t;
}

bool ParameterStore::has(const std::string& name) const {
  return index_.count(name) > 0;
}

Tensor& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw std::invalid_argument("unknown parameter: " + name);
  }
  return entries_[it->second].second;
}

const Tensor& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw std::invalid_argument("unknown parameter: " + name);
  }
  return entries_[it->second].second;
}

long ParameterStore::total_size() const {
  long n = 0;
  for (const auto& [name, t] : entries_) n += t.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& [name, t] : entries_) t.zero_grad();
}

void ParameterStore::set_trainable(bool trainable) {
  for (auto& [name, t] : entries_) t.set_requires_grad(trainable);
}

Linear::Linear(ParameterStore& store, const std::string& name, long in,
               long out, bool with_bias) {
  weight = store.create(name + ".weight", {in, out}, Init::kUniformFanIn);
  if (with_bias) {
    bias = store.create(name + ".bias", {out}, Init::kUniformFanIn, in);
  }
}

Tensor Linear::forward(const Tensor& x) const {
  Tensor y = matmul(x, weight);
  if (bias.defined()) y = add(y, bias);
  return y;
}

LayerNorm::LayerNorm(ParameterStore& store, const std::string& name,
                     long features) {
  gain = store.create(name + ".gain", {features}, Init::kOne);
  bias = store.create(name + ".bias", {features}, Init::kZero);
}

Mlp::Mlp(ParameterStore& store, const std::string& name, long in, long hidden,
         long out)
    : first(store, name + ".lin1", in, hidden),
      norm(store, name + ".norm", hidden),
      second(store, name + ".lin2", hidden, out) {}

Tensor Mlp::forward(const Tensor& x) const {
  return second.forward(relu(norm.forward(first.forward(x))));
}

EmbedMlp::EmbedMlp(ParameterStore& store, const std::string& name, long in,
                   long out)
    : lin(store, name + ".lin", in, out), norm(store, name + ".norm", out) {}

Tensor EmbedMlp::forward(const Tensor& x) const {
  return relu(norm.forward(lin.forward(x)));
}

LinearRes::LinearRes(ParameterStore& store, const std::string& name, long in,
                     long out)
    : lin1(store, name + ".lin1", in, out),
      norm1(store, name + ".norm1", out),
      lin2(store, name + ".lin2", out, out),
      norm2(store, name + ".norm2", out) {
  if (in != out) {
    proj.emplace(store, name + ".proj", in, out, /*with_bias=*/false);
    proj_norm.emplace(store, name + ".proj_norm", out);
  }
}

Tensor LinearRes::forward(const Tensor& x) const {
  Tensor h = relu(norm1.forward(lin1.forward(x)));
  h = norm2.forward(lin2.forward(h));
  Tensor shortcut = proj ? proj_norm->forward(proj->forward(x)) : x;
  return relu(add(h, shortcut));
}

Tensor channel_norm(const Tensor& x, const LayerNorm& norm) {
  return transpose(norm.forward(transpose(x)));
}

Res1d::Res1d(ParameterStore& store, const std::string& name, long c_in,
             long c_out, int stride_in)
    : norm1(store, name + ".norm1", c_out),
      norm2(store, name + ".norm2", c_out),
      stride(stride_in) {
  kernel1 =
      store.create(name + ".conv1.kernel", {c_out, c_in, 3}, Init::kUniformFanIn);
  kernel2 = store.create(name + ".conv2.kernel", {c_out, c_out, 3},
                         Init::kUniformFanIn);
  if (c_in != c_out || stride != 1) {
    proj_kernel = store.create(name + ".proj.kernel", {c_out, c_in, 1},
                               Init::kUniformFanIn);
    proj_norm.emplace(store, name + ".proj_norm", c_out);
  }
}

Tensor Res1d::forward(const Tensor& x) const {
  Tensor h = conv1d(x, kernel1, stride, 1);
  h = relu(channel_norm(h, norm1));
  h = conv1d(h, kernel2, 1, 1);
  h = channel_norm(h, norm2);
  Tensor shortcut = x;
  if (proj_kernel) {
    shortcut = conv1d(x, *proj_kernel, stride, 0);
    shortcut = channel_norm(shortcut, *proj_norm);
  }
  return relu(add(h, shortcut));
}

}  // namespace lanegcn
