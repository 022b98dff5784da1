#pragma once

namespace mirspec_cli {

int run(int argc, char** argv);

}  // namespace mirspec_cli
