#include "gradlore/error.hpp"
#include "gradlore/mlp.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace gradlore {

void save_mlp(std::ostream& os, const Mlp& net) {
  os << "mlp v1";
  for (std::size_t s : net.layer_sizes()) os << ' ' << s;
  if (net.output_activation() == OutputActivation::sigmoid) os << " out=sigmoid";
  os << '\n';
  char buf[64];
  for (double p : net.params()) {
    const auto res = std::to_chars(buf, buf + sizeof(buf), p, std::chars_format::hex);
    os.write(buf, res.ptr - buf);
    os << '\n';
  }
}

Mlp load_mlp(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw Error(ErrorCode::TruncatedFile, "load_mlp: missing header");
  std::istringstream hs(header);
  std::string magic, version;
  hs >> magic >> version;
  if (magic != "mlp" || version != "v1") throw Error(ErrorCode::BadMagic, "load_mlp: expected 'mlp v1'");
  std::vector<std::size_t> sizes;
  auto output = OutputActivation::identity;
  for (std::string tok; hs >> tok;) {
    if (tok == "out=sigmoid") {
      output = OutputActivation::sigmoid;
    } else if (tok == "out=identity") {
      output = OutputActivation::identity;
    } else {
      std::size_t v = 0;
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw Error(ErrorCode::BadParams, "load_mlp: bad layer size '" + tok + "'");
      sizes.push_back(v);
    }
  }
  Mlp net(std::move(sizes), output);
  for (double& p : net.params()) {
    std::string line;
    if (!std::getline(is, line)) throw Error(ErrorCode::TruncatedFile, "load_mlp: too few parameters");
    const char* last = line.data() + line.size();
    const auto res = std::from_chars(line.data(), last, p, std::chars_format::hex);
    if (res.ec != std::errc{} || res.ptr != last)
      throw Error(ErrorCode::BadParams, "load_mlp: bad parameter '" + line + "'");
  }
  return net;
}

}  // namespace gradlore
