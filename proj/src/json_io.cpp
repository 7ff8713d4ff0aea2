namespace prym {}
