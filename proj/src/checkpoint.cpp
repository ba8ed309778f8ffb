#include "laprep/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "laprep/error.hpp"

namespace laprep::nn {
namespace {

constexpr std::array<char, 8> kMagic{'L', 'A', 'P', 'R', 'E', 'P', 'N', 'N'};

template <typename U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) fail(ErrorCode::Io, "truncated checkpoint");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

void put_doubles(std::ostream& out, const std::vector<double>& values) {
  for (double v : values) put_le(out, std::bit_cast<std::uint64_t>(v));
}

void get_doubles(std::istream& in, std::vector<double>& values) {
  for (double& v : values) v = std::bit_cast<double>(get_le<std::uint64_t>(in));
}

}  // namespace

void save_checkpoint(const Mlp& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write checkpoint " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kCheckpointVersion);
  const auto& arch = net.arch();
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(arch.hidden.size()));
  put_le<std::uint64_t>(out, arch.input);
  for (auto h : arch.hidden) put_le<std::uint64_t>(out, h);
  put_le<std::uint64_t>(out, arch.output);
  for (const auto& layer : net.layers()) {
    put_doubles(out, layer.weight);
    put_doubles(out, layer.bias);
  }
  if (!out) fail(ErrorCode::Io, "failed writing checkpoint " + path.string());
}

Mlp load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot read checkpoint " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) fail(ErrorCode::Io, "not a checkpoint file: " + path.string());
  const auto version = get_le<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    fail(ErrorCode::Io, "unsupported checkpoint version " + std::to_string(version));
  }
  Architecture arch;
  const auto hidden = get_le<std::uint32_t>(in);
  if (hidden > 64) fail(ErrorCode::Io, "implausible layer count in checkpoint");
  arch.input = get_le<std::uint64_t>(in);
  for (std::uint32_t i = 0; i < hidden; ++i) arch.hidden.push_back(get_le<std::uint64_t>(in));
  arch.output = get_le<std::uint64_t>(in);
  Mlp net = Mlp::zeros(arch);
  for (auto& layer : net.layers()) {
    get_doubles(in, layer.weight);
    get_doubles(in, layer.bias);
  }
  in.peek();
  if (!in.eof()) fail(ErrorCode::Io, "trailing bytes in checkpoint " + path.string());
  return net;
}

}  // namespace laprep::nn
