#include "flagwalk/error.hpp"

namespace flagwalk {

void throw_invalid(const std::string& what) { throw InvalidArgument(what); }

}  // namespace flagwalk
