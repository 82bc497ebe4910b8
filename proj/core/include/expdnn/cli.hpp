#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace expdnn {

/// Runs one CLI invocation. args excludes the program name. Human output
/// goes to err, machine output (reports) to --out files or to out. Returns
/// 0 on success, 1 on domain failure (divergence, failed gradcheck, failed
/// reproduce threshold, write error), 2 on usage or config errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

inline int dispatch(const std::vector<std::string>& args) {
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace expdnn
