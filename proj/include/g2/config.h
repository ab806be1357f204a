#ifndef G2_CONFIG_H_
#define G2_CONFIG_H_

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace g2 {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// `key = value` lines; `#` starts a comment. Later keys override earlier ones.
class KeyValues {
 public:
  static KeyValues Parse(std::string_view text);
  static KeyValues FromFile(const std::filesystem::path& path);

  bool Has(const std::string& key) const { return values_.count(key) != 0; }
  void Set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  std::string GetString(const std::string& key, const std::string& fallback) const;
  bool GetBool(const std::string& key, bool fallback) const;
  long long GetInt(const std::string& key, long long fallback) const;
  double GetDouble(const std::string& key, double fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace g2

#endif  // G2_CONFIG_H_
