/* Small numeric helpers. */

int clamp(int value, int low, int high) {
    if (value < low) {
        return low;
    }
    if (value > high) {
        return high;
    }
    return value;
}

int sign(int x) {
    if (x > 0) {
        return 1;
    } else if (x < 0) {
        return -1;
    }
    return 0;
}

int sum_positive(int values[], int n) {
    int total = 0;
    for (int i = 0; i < n; i++) {
        if (values[i] > 0) {
            total += values[i];
        }
    }
    return total;
}

int count_in_range(int values[], int n, int low, int high) {
    int count = 0;
    for (int i = 0; i < n; i++) {
        int v = values[i];
        if (v >= low && v <= high) {
            count += 1;
        }
    }
    return count;
}

int weight_in_range(int values[], int n, int low, int high) {
    int count = 0;
    for (int i = 0; i < n; i++) {
        int v = values[i];
        if (v >= low && v <= high) {
            count += v;
        }
    }
    return count;
}
