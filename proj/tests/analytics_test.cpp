#include <doctest.h>

#include "aqua/analytics.hpp"
