#ifndef GLASSKIT_MIXTURE_IO_HPP
#define GLASSKIT_MIXTURE_IO_HPP

#include <string>
#include <string_view>

#include "glasskit/mixture.hpp"

namespace glasskit {

struct MixtureFile {
  std::string id;  // file stem, or the optional `id` key
  Mixture mixture;
  double scale;    // factor applied by normalization
};

// Mixture files are a TOML subset:
//
//   [mixture]
//   normalized = false
//   2 = 0.7071
//   3 = 0.7071
//
// Degree keys may be bare or quoted. `normalized = true` asserts that the
// coefficients already satisfy xi(1) = 1 to reading precision (1e-3); they
// are renormalized exactly either way. Errors are InvalidMixture and name
// the offending key or line.
MixtureFile parse_mixture(std::string_view text, const std::string& id);
MixtureFile load_mixture_file(const std::string& path);

}  // namespace glasskit

#endif  // GLASSKIT_MIXTURE_IO_HPP
