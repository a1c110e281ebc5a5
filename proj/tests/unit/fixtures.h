#pragma once

#include <filesystem>
#include <string>

#include "morphpipe/pipeline.h"

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(MORPHPIPE_FIXTURES_DIR) / name;
}

inline std::string read_fixture(const std::string& name) {
  return morphpipe::read_text_file(fixture_path(name));
}
