#pragma once

#include <catch2/catch_amalgamated.hpp>

#include "minfer/error.hpp"
#include "minfer/model.hpp"

// Asserts that `expr` throws minfer::Error carrying `errc`.
#define REQUIRE_ERRC(expr, errc)                                                                                       \
    do {                                                                                                               \
        bool thrown_ = false;                                                                                          \
        try {                                                                                                          \
            (void)(expr);                                                                                              \
        } catch (const minfer::Error& e_) {                                                                            \
            thrown_ = true;                                                                                            \
            CHECK(e_.code() == (errc));                                                                                \
        }                                                                                                              \
        CHECK(thrown_);                                                                                                \
    } while (0)

inline const minfer::MissingTable ocbgt{32, 54, 24};
