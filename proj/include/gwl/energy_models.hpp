#ifndef GWL_ENERGY_MODELS_HPP
#define GWL_ENERGY_MODELS_HPP

#include <memory>
#include <string>

#include "gwl/config_space.hpp"
#include "gwl/errors.hpp"
#include "gwl/tiny_nn.hpp"

namespace gwl {

// Scalar map x -> z over a discrete config space, plus the gradient of z
// with respect to the one-hot embedding of x. Implementations are immutable
// and safe to evaluate from several threads.
class EnergyModel {
 public:
  virtual ~EnergyModel() = default;

  virtual const ConfigSpace& space() const = 0;
  virtual const std::string& name() const = 0;

  virtual double energy(const Config& x) const = 0;
  virtual SiteMatrix grad_onehot(const Config& x) const = 0;

  // Both at once; models that share work between the two override this.
  virtual double energy_and_grad(const Config& x, SiteMatrix& grad) const {
    grad = grad_onehot(x);
    return energy(x);
  }
};

// Nearest-neighbour Ising model on an L x L periodic lattice with spins
// s = 2v - 1 and E = -sum over right and down bonds of s_i s_j.
class IsingModel final : public EnergyModel {
 public:
  explicit IsingModel(std::size_t L);

  const ConfigSpace& space() const override { return space_; }
  const std::string& name() const override { return name_; }
  std::size_t side() const { return L_; }

  double energy(const Config& x) const override;
  SiteMatrix grad_onehot(const Config& x) const override;

 private:
  std::size_t L_;
  ConfigSpace space_;
  std::string name_;
};

// Throws ModelMismatch unless the space is a square binary lattice.
double ising_energy(const ConfigSpace& space, const Config& x);
SiteMatrix ising_grad_onehot(const ConfigSpace& space, const Config& x);

class NetworkModel final : public EnergyModel {
 public:
  NetworkModel(Network net, std::string name);

  const ConfigSpace& space() const override { return net_.space(); }
  const std::string& name() const override { return name_; }
  const Network& network() const { return net_; }

  double energy(const Config& x) const override;
  SiteMatrix grad_onehot(const Config& x) const override;
  double energy_and_grad(const Config& x, SiteMatrix& grad) const override;

 private:
  Network net_;
  std::string name_;
};

// z = value everywhere; mostly useful for tests of the sampler plumbing.
class ConstantModel final : public EnergyModel {
 public:
  ConstantModel(ConfigSpace space, double value, std::string name = "const");

  const ConfigSpace& space() const override { return space_; }
  const std::string& name() const override { return name_; }

  double energy(const Config& x) const override;
  SiteMatrix grad_onehot(const Config& x) const override;

 private:
  ConfigSpace space_;
  double value_;
  std::string name_;
};

class UnknownModel : public Error {
 public:
  using Error::Error;
};

// Builds a model from its registry name:
//   ising:L=<n>
//   nn:<weights-file>
//   tinycnn:H=<h>,W=<w>[,V=<v>][,seed=<s>][,scale=<k>][,bias=<b>]
//   const:D=<d>,V=<v>[,value=<z>]
std::unique_ptr<EnergyModel> make_model(const std::string& name);

}  // namespace gwl

#endif  // GWL_ENERGY_MODELS_HPP
