#pragma once

// Shared conveniences for the test suites: fixture paths, throwaway
// directories, tiny file and matrix builders.

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "cogkit/linalg.hpp"

namespace testutil {

inline std::string fixture(const std::string& name) {
    return std::string(COGKIT_FIXTURE_DIR) + "/" + name;
}

inline std::string data_file(const std::string& name) {
    return std::string(COGKIT_DATA_DIR) + "/" + name;
}

// Unique directory removed (recursively) on destruction.
class TempDir {
public:
    TempDir() {
        static int counter = 0;
        const std::filesystem::path base =
            std::filesystem::temp_directory_path();
        do {
            path_ = base / ("cogkit_test_" + std::to_string(::getpid()) + "_" +
                            std::to_string(counter++));
        } while (std::filesystem::exists(path_));
        std::filesystem::create_directories(path_);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }

    std::string file(const std::string& name) const {
        return (path_ / name).string();
    }
    std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

inline std::string write_file(const std::string& path,
                              const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline cogkit::linalg::Matrix matrix(
    std::initializer_list<std::initializer_list<double>> rows) {
    cogkit::linalg::Matrix m(rows.size(), rows.begin()->size());
    std::size_t r = 0;
    for (const auto& row : rows) {
        std::size_t c = 0;
        for (double v : row) m.at(r, c++) = v;
        ++r;
    }
    return m;
}

}  // namespace testutil
