#pragma once

namespace pnc {

// Entry point of the pncsim tool. Returns 0 on success, 1 on a numerical
// failure, 2 on a usage or configuration error.
int cli_main(int argc, char** argv);

}  // namespace pnc
