#include "stein/preconditioner.hpp"

#include <cmath>
#include <stdexcept>

#include "stein/jacobi.hpp"
#include "stein/kernel_action.hpp"
#include "stein/low_rank.hpp"

namespace stein {

PrecondFamily parse_family(std::string_view name) {
  if (name == "none") return PrecondFamily::none;
  if (name == "jacobi") return PrecondFamily::jacobi;
  if (name == "nystrom") return PrecondFamily::nystrom;
  if (name == "nystrom-diag") return PrecondFamily::nystrom_diag;
  if (name == "fitc") return PrecondFamily::fitc;
  if (name == "rand-nystrom") return PrecondFamily::rand_nystrom;
  if (name == "rand-svd") return PrecondFamily::rand_svd;
  if (name == "spectral") return PrecondFamily::spectral;
  throw std::invalid_argument("parse_family: unknown preconditioner family '" + std::string(name) +
                              "'");
}

std::string_view to_string(PrecondFamily family) {
  switch (family) {
    case PrecondFamily::none: return "none";
    case PrecondFamily::jacobi: return "jacobi";
    case PrecondFamily::nystrom: return "nystrom";
    case PrecondFamily::nystrom_diag: return "nystrom-diag";
    case PrecondFamily::fitc: return "fitc";
    case PrecondFamily::rand_nystrom: return "rand-nystrom";
    case PrecondFamily::rand_svd: return "rand-svd";
    case PrecondFamily::spectral: return "spectral";
  }
  return "unknown";
}

std::unique_ptr<Preconditioner> make_preconditioner(const PrecondConfig& config,
                                                    const KernelAction& action) {
  // Config-level default for every low-rank family: n = ceil(sqrt(N)).
  const Eigen::Index inducing =
      config.inducing > 0
          ? config.inducing
          : std::min<Eigen::Index>(
                action.size(),
                static_cast<Eigen::Index>(std::ceil(std::sqrt(static_cast<double>(action.size())))));

  switch (config.family) {
    case PrecondFamily::none:
      return std::make_unique<IdentityPreconditioner>();
    case PrecondFamily::jacobi:
      return std::make_unique<BlockJacobiPreconditioner>(action, config.block_size);
    case PrecondFamily::nystrom:
      return std::make_unique<NystromPreconditioner>(action, inducing, config.nugget,
                                                     NystromSampling::uniform, config.seed);
    case PrecondFamily::nystrom_diag:
      return std::make_unique<NystromPreconditioner>(action, inducing, config.nugget,
                                                     NystromSampling::diagonal, config.seed);
    case PrecondFamily::fitc:
      return std::make_unique<FitcPreconditioner>(action, inducing, config.nugget, config.seed);
    case PrecondFamily::rand_nystrom:
      return std::make_unique<RandomizedNystromPreconditioner>(action, inducing, config.nugget,
                                                               config.seed);
    case PrecondFamily::rand_svd:
      return std::make_unique<RandomizedSvdPreconditioner>(action, inducing, config.nugget,
                                                           config.seed);
    case PrecondFamily::spectral:
      return std::make_unique<SpectralPreconditioner>(action, inducing, config.spectral_rank,
                                                      config.seed);
  }
  throw std::logic_error("make_preconditioner: unhandled family");
}

}  // namespace stein
