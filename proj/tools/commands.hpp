#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rawnight::cli {

// args excludes the program name. Diagnostics go to err as one JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rawnight::cli
