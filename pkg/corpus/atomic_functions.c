// expect: race_free
int counter;
void *worker(void *p) {
  atomic_fetch_add(&counter, 1);
  return NULL;
}
int main() {
  pthread_t a, b;
  pthread_create(&a, NULL, worker, NULL);
  pthread_create(&b, NULL, worker, NULL);
  int v = atomic_load(&counter);
  return 0;
}
