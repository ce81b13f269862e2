// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0

#include <detdeploy/keccak.hpp>
#include <detdeploy/packages.hpp>

#include <fstream>
#include <sstream>

namespace detdeploy::packages
{
Package ContentStore::fetch(const Hash256& cid) const
{
    const auto bytes = get(cid);
    if (!bytes)
        throw PackageError(PackageError::Code::UnknownCid, "unknown cid " + cid.hex());
    if (keccak256(*bytes) != cid)
        throw PackageError(PackageError::Code::CorruptObject, "object does not hash to " + cid.hex());
    return parse_package(*bytes);
}

Hash256 MemoryStore::put(const std::string& bytes)
{
    const auto cid = keccak256(bytes);
    std::scoped_lock lock(mutex_);
    objects_.try_emplace(cid, bytes);
    return cid;
}

std::optional<std::string> MemoryStore::get(const Hash256& cid) const
{
    std::scoped_lock lock(mutex_);
    const auto it = objects_.find(cid);
    if (it == objects_.end())
        return std::nullopt;
    return it->second;
}

std::size_t MemoryStore::size() const
{
    std::scoped_lock lock(mutex_);
    return objects_.size();
}

DirectoryStore::DirectoryStore(std::filesystem::path root) : root_(std::move(root))
{
    std::filesystem::create_directories(root_);
}

Hash256 DirectoryStore::put(const std::string& bytes)
{
    const auto cid = keccak256(bytes);
    const auto path = root_ / to_hex(cid.bytes);
    if (std::filesystem::exists(path))
        return cid;
    // Write then rename so concurrent writers of the same cid never expose a
    // partial object.
    auto tmp = path;
    tmp += ".tmp" + std::to_string(std::hash<std::string>{}(bytes) ^ reinterpret_cast<std::uintptr_t>(&tmp));
    {
        std::ofstream out(tmp, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    std::filesystem::rename(tmp, path);
    return cid;
}

std::optional<std::string> DirectoryStore::get(const Hash256& cid) const
{
    std::ifstream in(root_ / to_hex(cid.bytes), std::ios::binary);
    if (!in)
        return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t DirectoryStore::size() const
{
    std::size_t n = 0;
    for (const auto& entry : std::filesystem::directory_iterator(root_))
        n += entry.is_regular_file() && entry.path().extension().empty();
    return n;
}

}  // namespace detdeploy::packages
