#pragma once

#include <algorithm>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vthing {

/// Heap-allocated value with value semantics. Lets recursive types hold an
/// optional child by value (copy is deep, equality compares pointees).
template <typename T>
class Box {
public:
    Box() = default;
    Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
    Box(const Box& other) : ptr_(other.ptr_ ? std::make_unique<T>(*other.ptr_) : nullptr) {}
    Box(Box&&) noexcept = default;
    Box& operator=(const Box& other)
    {
        if (this != &other)
            ptr_ = other.ptr_ ? std::make_unique<T>(*other.ptr_) : nullptr;
        return *this;
    }
    Box& operator=(Box&&) noexcept = default;

    explicit operator bool() const noexcept { return ptr_ != nullptr; }
    bool has_value() const noexcept { return ptr_ != nullptr; }
    const T& operator*() const { return *ptr_; }
    T& operator*() { return *ptr_; }
    const T* operator->() const { return ptr_.get(); }
    T* operator->() { return ptr_.get(); }

    friend bool operator==(const Box& a, const Box& b)
    {
        if (!a.ptr_ || !b.ptr_)
            return !a.ptr_ && !b.ptr_;
        return *a.ptr_ == *b.ptr_;
    }

private:
    std::unique_ptr<T> ptr_;
};

/// Insertion-ordered string-keyed map. Inserting an existing key replaces the
/// value in place. Sized for affordance lists, so lookup is linear.
template <typename V>
class OrderedMap {
public:
    using value_type = std::pair<std::string, V>;
    using iterator = typename std::vector<value_type>::iterator;
    using const_iterator = typename std::vector<value_type>::const_iterator;

    V& insert_or_assign(std::string key, V value)
    {
        if (auto it = find(key); it != entries_.end()) {
            it->second = std::move(value);
            return it->second;
        }
        entries_.emplace_back(std::move(key), std::move(value));
        return entries_.back().second;
    }

    iterator find(std::string_view key)
    {
        return std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
    }
    const_iterator find(std::string_view key) const
    {
        return std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
    }
    bool contains(std::string_view key) const { return find(key) != entries_.end(); }

    const V* get(std::string_view key) const
    {
        auto it = find(key);
        return it == entries_.end() ? nullptr : &it->second;
    }
    V* get(std::string_view key)
    {
        auto it = find(key);
        return it == entries_.end() ? nullptr : &it->second;
    }

    iterator begin() { return entries_.begin(); }
    iterator end() { return entries_.end(); }
    const_iterator begin() const { return entries_.begin(); }
    const_iterator end() const { return entries_.end(); }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    bool operator==(const OrderedMap&) const = default;

private:
    std::vector<value_type> entries_;
};

} // namespace vthing
