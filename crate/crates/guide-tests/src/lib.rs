//! Compiles every code snippet in the book as a doc-test.
