// expect: race
#include <pthread.h>
int g;
void *worker(void *p) {
  g = g + 1;
  return NULL;
}
int main() {
  void *(*fp)(void *) = worker;
  pthread_t a;
  pthread_create(&a, NULL, fp, NULL);
  g = 5;
  return 0;
}
