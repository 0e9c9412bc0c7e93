#pragma once

#include <gtest/gtest.h>

#include "fishdet/error.hpp"

/// Asserts that `stmt` throws fishdet::Error carrying `errc`.
#define EXPECT_ERRC(stmt, errc)                                                              \
    do {                                                                                     \
        try {                                                                                \
            stmt;                                                                            \
            ADD_FAILURE() << "expected " << fishdet::to_string(errc) << ", nothing thrown";  \
        } catch (const fishdet::Error& e_) {                                                 \
            EXPECT_EQ(e_.code(), errc) << e_.what();                                         \
        }                                                                                    \
    } while (0)
