#pragma once

#include <string>
#include <string_view>

namespace rapo {

// Lowercase hex digests.
std::string sha256_hex(std::string_view bytes);
// Hash of the content as git would store it: sha1("blob <n>\0" + content).
std::string git_blob_hash(std::string_view content);

}  // namespace rapo
