#include <doctest.h>

#include "aqua/trainer.hpp"
