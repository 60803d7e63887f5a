#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "dreamer/net/params.hpp"

namespace dreamer::net {

// Named-tensor container: parameters, shapes, version counters, and Adam
// moments. Writing is canonical (map order), so save -> load -> save is
// byte-identical.
inline constexpr uint32_t kParamFormatVersion = 1;

void save_params(std::ostream& os, const ParamSet& params);
ParamSet load_params(std::istream& is);

void save_params_file(const std::string& path, const ParamSet& params);
ParamSet load_params_file(const std::string& path);

}  // namespace dreamer::net
