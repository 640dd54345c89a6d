"""Command-line front end: scenario runs, sweeps, CSV/SVG output."""
