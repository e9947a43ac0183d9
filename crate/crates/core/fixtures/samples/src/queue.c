#include <stdlib.h>

/* Fixed-size ring buffer. */
struct ring {
    int *items;
    int head, tail, size;
};

int ring_push(struct ring *r, int value) {
    int next = (r->tail + 1) % r->size;
    if (next == r->head) {
        return -1; // full
    }
    r->items[r->tail] = value;
    r->tail = next;
    return 0;
}

int ring_pop(struct ring *r, int *out) {
    if (r->head == r->tail) {
        return -1;
    }
    *out = r->items[r->head];
    r->head = (r->head + 1) % r->size;
    return 0;
}
