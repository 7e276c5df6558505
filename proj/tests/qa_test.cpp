#include <doctest.h>

#include "aqua/qa.hpp"
