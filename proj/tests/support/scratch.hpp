// Per-test scratch directory, removed on destruction.
#ifndef DRN_TESTS_SCRATCH_HPP
#define DRN_TESTS_SCRATCH_HPP

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

namespace testing {

class Scratch {
public:
    explicit Scratch(const std::string &tag)
    {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("drn_" + tag + "_" + std::to_string(rd()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~Scratch()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    Scratch(const Scratch &) = delete;
    Scratch &operator=(const Scratch &) = delete;

    const std::filesystem::path &path() const { return path_; }
    std::filesystem::path operator/(const std::string &name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path &p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testing

#endif
